#pragma once

// Umbrella header: the whole library in one include.

#include "aniso/anisotropy.hpp"
#include "aniso/core.hpp"
#include "aniso/errors.hpp"
#include "aniso/geometry.hpp"
#include "aniso/io.hpp"
#include "aniso/oned.hpp"
#include "aniso/parallel.hpp"
#include "aniso/solver2d.hpp"
#include "aniso/spectral.hpp"
#include "aniso/version.hpp"
