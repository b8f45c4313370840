#pragma once

#include "nesscorr/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace nesscorr {

// JSON model config.
//
//   n_modes      positive integer
//   hopping      dense N x N array, or {"type": "long_range_chain", "v": .., "alpha": ..}
//   gamma_plus   dense array, sparse triplet list [[i, j, value], ...] or
//   gamma_minus  {"type": "sparse", "entries": [...]}; omitted means zero
//   sigma        dense, sparse, or {"type": "onsite", "value": s}
//
// Indices are zero-based. A complex entry is a number or a [re, im] pair. A bare
// array that is exactly N rows of N entries is read as dense; any other bare
// array is a triplet list.
NetworkModel model_from_json(std::string_view text);
std::string model_to_json(const NetworkModel& model);

NetworkModel load_model_file(const std::filesystem::path& path);
void save_model_file(const NetworkModel& model, const std::filesystem::path& path);

}  // namespace nesscorr
