#ifndef LIL_IO_HPP
#define LIL_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "lil/characterize.hpp"
#include "lil/harness.hpp"
#include "lil/manifold.hpp"
#include "lil/simulate.hpp"
#include "lil/spectral.hpp"
#include "lil/version.hpp"

namespace lil {

using json = nlohmann::json;

// Manifold wire format: {"kind":"circle","L":6.283...},
// {"kind":"flat_torus","L":[1.0,1.0]}, {"kind":"sphere2"}.
json to_json(const ManifoldSpec& m);
ManifoldSpec manifold_from_json(const json& j);

// {"manifold":..., "coeffs":[{"n":1,"c":0.5}, ...]}
json to_json(const SpectralFunction& f);
SpectralFunction spectral_function_from_json(const json& j);

json to_json(const PathState& s);
PathState path_state_from_json(const json& j);

json to_json(const SimConfig& c);
SimConfig sim_config_from_json(const json& j);

json to_json(const CheckReport& r);
json to_json(const TargetChaseResult& r);

/// Rejects objects carrying keys outside `allowed` (schema validation).
void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const char* context);

/// FNV-1a 64-bit hash of a canonical (sorted-key) JSON dump; embedded in
/// every emitted file so identical (version, config, seed) runs are
/// byte-comparable.
uint64_t config_hash(const json& j);

std::string format_double(double v);  // shortest round-trip decimal

/// "# key: value" comment lines carrying (tool version, config hash, seed).
std::string meta_header(uint64_t cfg_hash, uint64_t seed);
json meta_json(uint64_t cfg_hash, uint64_t seed);

/// Write-then-rename so readers never observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string checkpoint_csv(const EnsembleResult& ensemble, const SimConfig& cfg,
                           uint64_t cfg_hash);
std::string eigenpair_csv(const std::vector<EigenPair>& pairs, uint64_t cfg_hash,
                          uint64_t seed);
std::string cloud_csv(const ClusterCloud& cloud, const EllipsoidSpec& e,
                      uint64_t cfg_hash, uint64_t seed);
std::string limsup_csv(const std::vector<RunningLimsupRow>& rows, uint64_t cfg_hash,
                       uint64_t seed);

}  // namespace lil

#endif  // LIL_IO_HPP
