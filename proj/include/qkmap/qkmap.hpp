#pragma once

#include "qkmap/binding.hpp"
#include "qkmap/circuit_ir.hpp"
#include "qkmap/driver.hpp"
#include "qkmap/errors.hpp"
#include "qkmap/fabric.hpp"
#include "qkmap/generators.hpp"
#include "qkmap/partition.hpp"
#include "qkmap/qec_profile.hpp"
#include "qkmap/qodg.hpp"
#include "qkmap/scheduling.hpp"
