#include <catch_amalgamated.hpp>

#include "support.hpp"
