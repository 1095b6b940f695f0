#pragma once
#include "qbell/protocol.hpp"
