#include <pybind11/pybind11.h>
PYBIND11_MODULE(paclab, m) { m.doc() = "placeholder"; }
