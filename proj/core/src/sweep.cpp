#include "qbell/sweep.hpp"
