#pragma once

#include "voterlab/acceptance.hpp"
#include "voterlab/birth_death.hpp"
#include "voterlab/dynamics.hpp"
#include "voterlab/errors.hpp"
#include "voterlab/graph.hpp"
#include "voterlab/kernels.hpp"
#include "voterlab/linalg.hpp"
#include "voterlab/montecarlo.hpp"
#include "voterlab/oracle.hpp"
#include "voterlab/rng.hpp"
#include "voterlab/stats.hpp"
#include "voterlab/walks.hpp"
