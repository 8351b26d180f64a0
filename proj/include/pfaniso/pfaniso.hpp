#pragma once

#include "pfaniso/kelvin.hpp"
#include "pfaniso/elasticity.hpp"
#include "pfaniso/split.hpp"
#include "pfaniso/phasefield.hpp"
#include "pfaniso/mesh.hpp"
#include "pfaniso/fem.hpp"
#include "pfaniso/solver.hpp"
#include "pfaniso/gtheta.hpp"
#include "pfaniso/io.hpp"
#include "pfaniso/config.hpp"
#include "pfaniso/benchmark.hpp"
#include "pfaniso/verify.hpp"
