#pragma once

#include "ppde/config.hpp"
#include "ppde/dataset.hpp"
#include "ppde/experiment.hpp"
#include "ppde/families.hpp"
#include "ppde/fem.hpp"
#include "ppde/mesh.hpp"
#include "ppde/network.hpp"
#include "ppde/rng.hpp"
#include "ppde/training.hpp"
