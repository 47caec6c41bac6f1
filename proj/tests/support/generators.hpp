#pragma once

#include "l2t/random.hpp"

namespace l2t {
namespace testing = gen;
}
