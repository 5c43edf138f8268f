#include "hompol_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace hompol::cli {

using nlohmann::json;

KeyReader::KeyReader(const json &object, std::string path)
    : object_(&object), path_(std::move(path)) {
    if (!object.is_object()) {
        throw ConfigError("'" + (path_.empty() ? std::string("<root>") : path_) +
                          "' must be a JSON object");
    }
}

std::string KeyReader::key_path(const std::string &key) const {
    return path_.empty() ? key : path_ + "." + key;
}

bool KeyReader::has(const std::string &key) const { return object_->contains(key); }

const json &KeyReader::at(const std::string &key) {
    if (!has(key)) {
        throw ConfigError("missing required key '" + key_path(key) + "'");
    }
    used_.insert(key);
    return object_->at(key);
}

double KeyReader::number(const std::string &key) {
    const auto &v = at(key);
    if (!v.is_number()) {
        throw ConfigError("'" + key_path(key) + "' must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError("'" + key_path(key) + "' must be finite");
    }
    return x;
}

double KeyReader::number_or(const std::string &key, double fallback) {
    return has(key) ? number(key) : fallback;
}

bool KeyReader::boolean_or(const std::string &key, bool fallback) {
    if (!has(key)) {
        return fallback;
    }
    const auto &v = at(key);
    if (!v.is_boolean()) {
        throw ConfigError("'" + key_path(key) + "' must be true or false");
    }
    return v.get<bool>();
}

std::int64_t KeyReader::integer(const std::string &key) {
    const auto &v = at(key);
    if (v.is_number_integer()) {
        return v.get<std::int64_t>();
    }
    // Accept 1e5-style literals when they are whole numbers.
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e15) {
            return static_cast<std::int64_t>(x);
        }
    }
    throw ConfigError("'" + key_path(key) + "' must be an integer");
}

std::int64_t KeyReader::integer_or(const std::string &key, std::int64_t fallback) {
    return has(key) ? integer(key) : fallback;
}

std::uint64_t KeyReader::seed(const std::string &key) {
    const auto &v = at(key);
    if (!v.is_number_unsigned()) {
        throw ConfigError("'" + key_path(key) + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string KeyReader::string(const std::string &key) {
    const auto &v = at(key);
    if (!v.is_string()) {
        throw ConfigError("'" + key_path(key) + "' must be a string");
    }
    return v.get<std::string>();
}

KeyReader KeyReader::object(const std::string &key) {
    return KeyReader(at(key), key_path(key));
}

void KeyReader::finish() const {
    for (const auto &[key, value] : object_->items()) {
        if (!used_.contains(key)) {
            throw ConfigError("unknown key '" + key_path(key) + "'");
        }
    }
}

std::vector<double> linspace(double start, double stop, std::int64_t count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = start;
        return out;
    }
    for (std::int64_t i = 0; i < count; ++i) {
        // Pin the last point so grids end exactly on `stop`.
        out[static_cast<std::size_t>(i)] =
            i == count - 1 ? stop
                           : start + (stop - start) * static_cast<double>(i) /
                                         static_cast<double>(count - 1);
    }
    return out;
}

namespace {

std::vector<double> number_list(const json &v, const std::string &where) {
    if (!v.is_array()) {
        throw ConfigError("'" + where + "' must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto &x : v) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
            throw ConfigError("'" + where + "' must contain finite numbers only");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

void require_increasing(const std::vector<double> &g, const std::string &where) {
    if (g.empty()) {
        throw ConfigError("'" + where + "' is empty");
    }
    for (std::size_t i = 1; i < g.size(); ++i) {
        if (!(g[i] > g[i - 1])) {
            throw ConfigError("'" + where + "' must be strictly increasing");
        }
    }
}

json range_spec(double start, double stop, std::int64_t count) {
    return json{{"start", start}, {"stop", stop}, {"count", count}};
}

/// Adds `value` under `key` when the user did not set it.
void fill(json &resolved, const std::string &key, const json &value) {
    if (!resolved.contains(key)) {
        resolved[key] = value;
    }
}

} // namespace

std::vector<double> read_grid(KeyReader &parent, const std::string &key,
                              std::optional<std::vector<double>> fallback) {
    const auto where = parent.key_path(key);
    if (!parent.has(key)) {
        if (!fallback) {
            throw ConfigError("missing required key '" + where + "'");
        }
        return *fallback;
    }
    const auto &node = parent.at(key);
    std::vector<double> grid;
    if (node.is_array()) {
        grid = number_list(node, where);
    } else {
        KeyReader r(node, where);
        if (r.has("values")) {
            grid = number_list(r.at("values"), where + ".values");
        } else {
            const double start = r.number("start");
            const double stop = r.number("stop");
            const auto count = r.integer("count");
            if (count < 1 || count > 10'000'000) {
                throw ConfigError("'" + where + ".count' must lie in [1, 1e7]");
            }
            grid = linspace(start, stop, count);
        }
        r.finish();
    }
    require_increasing(grid, where);
    return grid;
}

SpectrumConfig read_spectrum(KeyReader &parent, const std::string &key) {
    auto r = parent.object(key);
    SpectrumConfig s{r.number("lambda0_nm"), r.number("delta_lambda_nm"), r.number("l_c_um")};
    r.finish();
    if (!(s.l_c_um > 0.0)) {
        throw ConfigError("'" + r.key_path("l_c_um") + "' must be positive");
    }
    if (!(s.lambda0_nm - 0.5 * std::abs(s.delta_lambda_nm) > 0.0)) {
        throw ConfigError("'" + r.key_path("lambda0_nm") +
                          "' must exceed half the wavelength offset");
    }
    return s;
}

json load_json(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        // Translate the byte offset into line:column.
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" +
                          std::to_string(col) + ": invalid JSON (" + e.what() + ")");
    }
}

namespace {

constexpr double kPi = std::numbers::pi;

std::optional<std::uint64_t> seed_with_override(KeyReader &r,
                                                std::optional<std::uint64_t> override_value,
                                                json &resolved) {
    std::optional<std::uint64_t> seed;
    if (r.has("seed")) {
        seed = r.seed("seed");
    }
    if (override_value) {
        seed = override_value;
    }
    if (!seed) {
        throw ConfigError("missing required key 'seed' (or pass --seed)");
    }
    resolved["seed"] = *seed;
    return seed;
}

std::filesystem::path data_path(KeyReader &r, const std::filesystem::path &base_dir) {
    std::filesystem::path p = r.string("data");
    if (p.empty()) {
        throw ConfigError("'data' must not be empty");
    }
    return p.is_absolute() ? p : base_dir / p;
}

FitConfig read_fit(KeyReader &parent, json &resolved_fit) {
    auto r = parent.object("fit");
    FitConfig c;
    c.lambda0_nm = r.number("lambda0_nm");
    c.l_c_um = r.number("l_c_um");
    c.delta_lambda_nm = r.number("delta_lambda_nm");
    c.delta_z_um = r.number_or("delta_z_um", c.delta_z_um);
    c.background = r.number_or("background", c.background);
    c.fit_delta_z = r.boolean_or("fit_delta_z", c.fit_delta_z);
    c.fit_delta_lambda = r.boolean_or("fit_delta_lambda", c.fit_delta_lambda);
    c.fit_background = r.boolean_or("fit_background", c.fit_background);
    r.finish();
    if (!(c.l_c_um > 0.0) || !(c.lambda0_nm > 0.0)) {
        throw ConfigError("'fit.l_c_um' and 'fit.lambda0_nm' must be positive");
    }
    if (!(c.background >= 0.0 && c.background < 1.0)) {
        throw ConfigError("'fit.background' must lie in [0, 1)");
    }
    if (c.free_parameters() == 0) {
        throw ConfigError("'fit' leaves no free parameter");
    }
    fill(resolved_fit, "delta_z_um", c.delta_z_um);
    fill(resolved_fit, "background", c.background);
    fill(resolved_fit, "fit_delta_z", c.fit_delta_z);
    fill(resolved_fit, "fit_delta_lambda", c.fit_delta_lambda);
    fill(resolved_fit, "fit_background", c.fit_background);
    return c;
}

template <class Config>
Config parse_scan_like(const json &j, json &resolved, std::vector<double> default_cuts) {
    KeyReader r(j, "");
    resolved = j;
    Config c;
    c.lab = read_spectrum(r, "lab");
    c.phi_rad = read_grid(r, "phi_rad", linspace(0.0, kPi, 201));
    fill(resolved, "phi_rad", range_spec(0.0, kPi, 201));
    c.delta_z_um = read_grid(r, "delta_z_um", linspace(0.0, 90.0, 91));
    fill(resolved, "delta_z_um", range_spec(0.0, 90.0, 91));
    if (r.has("cuts_delta_z_um")) {
        c.cuts_delta_z_um = number_list(r.at("cuts_delta_z_um"), "cuts_delta_z_um");
        require_increasing(c.cuts_delta_z_um, "cuts_delta_z_um");
    } else {
        c.cuts_delta_z_um = std::move(default_cuts);
        resolved["cuts_delta_z_um"] = c.cuts_delta_z_um;
    }
    r.finish();
    return c;
}

} // namespace

ProbmapConfig parse_probmap(const json &j, json &resolved) {
    return parse_scan_like<ProbmapConfig>(j, resolved, {0.0, 30.0, 60.0});
}

FisherScanConfig parse_fisher_scan(const json &j, json &resolved) {
    return parse_scan_like<FisherScanConfig>(j, resolved, {0.0, 10.0, 30.0, 60.0});
}

HomDipConfig parse_hom_dip(const json &j, std::optional<std::uint64_t> seed_override,
                           const std::filesystem::path &base_dir, json &resolved) {
    KeyReader r(j, "");
    resolved = j;
    HomDipConfig c;
    c.l_c_guess_um = r.number("l_c_guess_um");
    if (!(c.l_c_guess_um > 0.0)) {
        throw ConfigError("'l_c_guess_um' must be positive");
    }
    if (r.has("input")) {
        if (r.has("truth")) {
            throw ConfigError("'input' and 'truth' are mutually exclusive");
        }
        std::filesystem::path p = r.string("input");
        c.input = p.is_absolute() ? p : base_dir / p;
    } else {
        auto t = r.object("truth");
        c.truth = HomDipModel{t.number("visibility"), t.number("center_um"), t.number("l_c_um")};
        t.finish();
        if (!(c.truth->visibility >= 0.0 && c.truth->visibility <= 1.0)) {
            throw ConfigError("'truth.visibility' must lie in [0, 1]");
        }
        if (!(c.truth->l_c_um > 0.0)) {
            throw ConfigError("'truth.l_c_um' must be positive");
        }
        c.delta_z_um = read_grid(r, "delta_z_um", linspace(-90.0, 90.0, 61));
        fill(resolved, "delta_z_um", range_spec(-90.0, 90.0, 61));
        c.pairs_per_point = r.integer("pairs_per_point");
        if (c.pairs_per_point <= 0) {
            throw ConfigError("'pairs_per_point' must be positive");
        }
        c.seed = *seed_with_override(r, seed_override, resolved);
    }
    r.finish();
    return c;
}

SimulateConfig parse_simulate(const json &j, std::optional<std::uint64_t> seed_override,
                              json &resolved) {
    KeyReader r(j, "");
    resolved = j;
    SimulateConfig c;
    {
        auto m = r.object("model");
        c.model.lab.delta_z_um = m.number("delta_z_um");
        c.model.lab.lambda0_nm = m.number("lambda0_nm");
        c.model.lab.delta_lambda_nm = m.number("delta_lambda_nm");
        c.model.lab.l_c_um = m.number("l_c_um");
        c.model.background = m.number("background");
        m.finish();
        if (!(c.model.lab.l_c_um > 0.0) || !(c.model.lab.lambda0_nm > 0.0)) {
            throw ConfigError("'model.l_c_um' and 'model.lambda0_nm' must be positive");
        }
        if (!(c.model.background >= 0.0 && c.model.background < 1.0)) {
            throw ConfigError("'model.background' must lie in [0, 1)");
        }
    }
    if (r.has("theta_rad") && r.has("phi_rad")) {
        throw ConfigError("give either 'theta_rad' or 'phi_rad', not both");
    }
    if (r.has("phi_rad")) {
        c.theta_rad = read_grid(r, "phi_rad");
        for (auto &x : c.theta_rad) {
            x /= 4.0;
        }
    } else {
        c.theta_rad = read_grid(r, "theta_rad", linspace(0.0, kPi / 4, 41));
        fill(resolved, "theta_rad", range_spec(0.0, kPi / 4, 41));
    }
    c.mean_events_per_setting = r.number("mean_events_per_setting");
    if (!(c.mean_events_per_setting > 0.0)) {
        throw ConfigError("'mean_events_per_setting' must be positive");
    }
    c.seed = *seed_with_override(r, seed_override, resolved);
    if (r.has("acquisition")) {
        auto a = r.object("acquisition");
        c.acquisition = Acquisition{a.number("rate_hz"), a.number("duration_s")};
        a.finish();
    }
    r.finish();
    return c;
}

FitCommandConfig parse_fit(const json &j, const std::filesystem::path &base_dir,
                           json &resolved) {
    KeyReader r(j, "");
    resolved = j;
    FitCommandConfig c;
    c.data = data_path(r, base_dir);
    c.fit = read_fit(r, resolved["fit"]);
    r.finish();
    return c;
}

McBandConfig parse_mc_band(const json &j, std::optional<std::uint64_t> seed_override,
                           const std::filesystem::path &base_dir, json &resolved) {
    KeyReader r(j, "");
    resolved = j;
    McBandConfig c;
    c.data = data_path(r, base_dir);
    c.fit = read_fit(r, resolved["fit"]);
    const auto n = r.integer_or("n_resamples", 100);
    if (n < 100 || n > 1'000'000) {
        throw ConfigError("'n_resamples' must lie in [100, 1e6]");
    }
    c.n_resamples = static_cast<int>(n);
    fill(resolved, "n_resamples", c.n_resamples);
    c.phi_rad = read_grid(r, "phi_rad", linspace(0.0, kPi, 201));
    fill(resolved, "phi_rad", range_spec(0.0, kPi, 201));
    c.seed = *seed_with_override(r, seed_override, resolved);
    r.finish();
    return c;
}

} // namespace hompol::cli
