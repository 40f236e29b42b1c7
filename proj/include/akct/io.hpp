#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "akct/dist.hpp"

namespace akct {

using Json = nlohmann::ordered_json;

// Instance files hold either a density {"breakpoints": [...], "heights":
// [...]} or a pmf {"masses": [...]}.  Readers validate the type invariants
// and report the first violation with its index.  Densities on a domain
// other than [0, 1] are affinely rescaled at ingestion (A_k is invariant
// under monotone maps, so nothing is lost).
using Instance = std::variant<PiecewiseConstantDensity, DiscretePmf>;

Instance read_instance(const std::filesystem::path& path);
Instance parse_instance(const Json& j, const std::string& context);

PiecewiseConstantDensity read_density(const std::filesystem::path& path);
DiscretePmf read_pmf(const std::filesystem::path& path);

Json density_to_json(const PiecewiseConstantDensity& d);
Json pmf_to_json(const DiscretePmf& d);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

// Lift a pmf over [n] to the piecewise-constant density on [0, 1] whose
// pieces are the n equal-width bins.  Sampling the lifted density jitters
// each discrete draw uniformly within its bin, which is how discrete inputs
// reach the order-statistic testers with ties broken at random.
PiecewiseConstantDensity lift_to_density(const DiscretePmf& pmf);

} // namespace akct
