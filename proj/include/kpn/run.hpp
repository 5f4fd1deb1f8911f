#pragma once

// Mode dispatch for the batch entry point. Artifacts go to io.output_dir.

#include <ostream>
#include <string>

#include <json.hpp>

#include "kpn/config.hpp"
#include "kpn/network.hpp"

namespace kpn {

/// {objective, reg_cost, nnz, sparsity_bound, kkt_residual} of a model on a
/// dataset; the KKT residual is that of the LASSO at the model's atoms.
nlohmann::json model_metrics(const Model& model, const Dataset& data, double lambda);

/// Random dictionary for `lasso` mode: Haar directions, planes through data
/// points drawn in shuffled passes, offsets of half the projected spread.
std::vector<Atom> random_dictionary(const OperatorSpec& spec, const Dataset& data, int size, std::uint64_t seed);

/// Runs config.mode. Returns 0 on success; for verify, 0 iff every criterion
/// passes. Library errors propagate.
int run(const RunConfig& config, std::ostream& log);

}  // namespace kpn
