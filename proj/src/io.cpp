#include "akct/io.hpp"

#include <fstream>

namespace akct {

namespace {

std::vector<double> require_number_array(const Json& j, const char* key,
                                         const std::string& context) {
    if (!j.contains(key) || !j[key].is_array())
        throw IoError(context + ": missing array field \"" + std::string(key) + "\"");
    std::vector<double> out;
    out.reserve(j[key].size());
    for (std::size_t i = 0; i < j[key].size(); ++i) {
        const auto& v = j[key][i];
        if (!v.is_number())
            throw IoError(context + ": \"" + key + "\"[" + std::to_string(i) +
                          "] is not a number");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace

Instance parse_instance(const Json& j, const std::string& context) {
    if (j.contains("masses")) {
        return DiscretePmf::make(require_number_array(j, "masses", context));
    }
    if (j.contains("breakpoints") || j.contains("heights")) {
        std::vector<double> bp = require_number_array(j, "breakpoints", context);
        std::vector<double> h = require_number_array(j, "heights", context);
        if (bp.size() >= 2 && (bp.front() != 0.0 || bp.back() != 1.0)) {
            double lo = bp.front(), hi = bp.back();
            double span = hi - lo;
            if (!(span > 0.0))
                throw NonAscendingBreakpoints(context + ": degenerate domain");
            for (auto& x : bp) x = (x - lo) / span;
            bp.front() = 0.0;
            bp.back() = 1.0;
            for (auto& y : h) y *= span;
        }
        return PiecewiseConstantDensity::make(std::move(bp), std::move(h));
    }
    throw IoError(context + ": expected \"breakpoints\"/\"heights\" or \"masses\"");
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return j;
}

Instance read_instance(const std::filesystem::path& path) {
    return parse_instance(read_json(path), path.string());
}

PiecewiseConstantDensity read_density(const std::filesystem::path& path) {
    Instance inst = read_instance(path);
    if (auto* d = std::get_if<PiecewiseConstantDensity>(&inst)) return std::move(*d);
    throw IoError(path.string() + ": expected a density, found a pmf");
}

DiscretePmf read_pmf(const std::filesystem::path& path) {
    Instance inst = read_instance(path);
    if (auto* d = std::get_if<DiscretePmf>(&inst)) return std::move(*d);
    throw IoError(path.string() + ": expected a pmf, found a density");
}

Json density_to_json(const PiecewiseConstantDensity& d) {
    return Json{{"breakpoints", d.breakpoints()}, {"heights", d.heights()}};
}

Json pmf_to_json(const DiscretePmf& d) { return Json{{"masses", d.masses()}}; }

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

PiecewiseConstantDensity lift_to_density(const DiscretePmf& pmf) {
    std::size_t n = pmf.size();
    std::vector<double> bp(n + 1);
    std::vector<double> h(n);
    for (std::size_t i = 0; i <= n; ++i)
        bp[i] = static_cast<double>(i) / static_cast<double>(n);
    bp[n] = 1.0;
    for (std::size_t i = 0; i < n; ++i) h[i] = pmf[i] * static_cast<double>(n);
    return PiecewiseConstantDensity::make(std::move(bp), std::move(h));
}

} // namespace akct
