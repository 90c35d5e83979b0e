#pragma once

// Umbrella header for the rough-path toolkit.

#include "roughpath/errors.hpp"
#include "roughpath/linalg.hpp"
#include "roughpath/path.hpp"
#include "roughpath/variation.hpp"
#include "roughpath/random.hpp"
#include "roughpath/rough_path.hpp"
#include "roughpath/controlled.hpp"
#include "roughpath/functional.hpp"
#include "roughpath/rough_integral.hpp"
#include "roughpath/rde.hpp"
#include "roughpath/oracle.hpp"
#include "roughpath/io.hpp"
#include "roughpath/registry.hpp"
