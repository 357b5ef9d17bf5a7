#ifndef ORTHOMEASURE_ORTHOMEASURE_HPP
#define ORTHOMEASURE_ORTHOMEASURE_HPP

#include "orthomeasure/change_of_measure.hpp"
#include "orthomeasure/error.hpp"
#include "orthomeasure/harness.hpp"
#include "orthomeasure/integration.hpp"
#include "orthomeasure/probability.hpp"
#include "orthomeasure/set_system.hpp"
#include "orthomeasure/spectral_process.hpp"
#include "orthomeasure/stochastic_measure.hpp"

#endif  // ORTHOMEASURE_ORTHOMEASURE_HPP
