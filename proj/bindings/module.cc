// Apache License, Version 2.0, refer to LICENSE.txt

#include <pybind11/pybind11.h>

PYBIND11_MODULE(_core, m) { m.doc() = "placeholder"; }
