#pragma once

#include <string>
#include <string_view>

#include "prhf/meanfield.hpp"

namespace prhf {

enum class Model { Hartree, HartreeFock };

std::string_view model_name(Model m);
Model parse_model(std::string_view name);

struct SimState {
  OrbitalSet psi;
  double t = 0.0;
  long step_index = 0;
  Model model = Model::Hartree;
};

/// E_H or E_HF depending on the model.
double model_energy(const OrbitalSet& psi, Model model);

}  // namespace prhf
