#ifndef SFVM_SFVM_HPP_
#define SFVM_SFVM_HPP_

// Everything except io.hpp, which additionally needs nlohmann/json.

#include "sfvm/builtin_fluxes.hpp"
#include "sfvm/config.hpp"
#include "sfvm/entropy.hpp"
#include "sfvm/errors.hpp"
#include "sfvm/expression.hpp"
#include "sfvm/fluxfield.hpp"
#include "sfvm/forms.hpp"
#include "sfvm/harness.hpp"
#include "sfvm/mesh.hpp"
#include "sfvm/parallel.hpp"
#include "sfvm/quadrature.hpp"
#include "sfvm/regularity.hpp"
#include "sfvm/root_finding.hpp"
#include "sfvm/scheme.hpp"

#endif  // SFVM_SFVM_HPP_
