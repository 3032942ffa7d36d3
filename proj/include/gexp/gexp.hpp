#pragma once

#include "gexp/axioms.hpp"
#include "gexp/characterization.hpp"
#include "gexp/distribution.hpp"
#include "gexp/error.hpp"
#include "gexp/gheat.hpp"
#include "gexp/independence.hpp"
#include "gexp/sublinear.hpp"
#include "gexp/test_function.hpp"
