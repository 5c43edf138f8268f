#include "hompol_cli/commands.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

#include "hompol/hompol.hpp"
#include "hompol_cli/config.hpp"

namespace hompol::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> &command_names() {
    static const std::vector<std::string> names{"probmap", "fisher-scan", "hom-dip",
                                                "simulate", "fit",         "mc-band"};
    return names;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

constexpr double kPi = std::numbers::pi;

using Column = std::pair<std::string, std::string>; // name, unit

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string num(double x) { return io::format_double(x); }

std::string label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

/// Collects output files and writes them in one go once the computation is
/// complete.
class Outputs {
  public:
    Outputs(fs::path dir, std::string command, json config, std::optional<std::uint64_t> seed)
        : dir_(std::move(dir)) {
        meta_["tool"] = "hompol-cli";
        meta_["version"] = kVersion;
        meta_["command"] = std::move(command);
        meta_["config_hash"] = "fnv1a64:" + hex64(fnv1a64(config.dump()));
        meta_["config"] = std::move(config);
        meta_["seed"] = seed ? json(*seed) : json(nullptr);
    }

    [[nodiscard]] const json &meta() const { return meta_; }

    void add_csv(const std::string &stem, const std::vector<Column> &columns,
                 const std::string &rows, const json &extra = json::object()) {
        std::string text;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            text += (i ? "," : "") + columns[i].first;
        }
        text += '\n';
        text += rows;
        files_.emplace_back(stem + ".csv", std::move(text));

        json side = meta_;
        side["file"] = stem + ".csv";
        side["columns"] = json::array();
        json units = json::object();
        for (const auto &[name, unit] : columns) {
            side["columns"].push_back(name);
            units[name] = unit;
        }
        side["units"] = units;
        side.update(extra);
        files_.emplace_back(stem + ".json", side.dump(2) + "\n");
    }

    void add_json(const std::string &name, const json &content) {
        json doc = meta_;
        doc.update(content);
        files_.emplace_back(name, doc.dump(2) + "\n");
    }

    void add_raw(const std::string &name, std::string text) {
        files_.emplace_back(name, std::move(text));
    }

    void flush(std::ostream &log) const {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw IoError("cannot create output directory " + dir_.string() + ": " +
                          ec.message());
        }
        for (const auto &[name, text] : files_) {
            const auto path = dir_ / name;
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            out << text;
            out.flush();
            if (!out) {
                throw IoError("cannot write " + path.string());
            }
            log << "wrote " << path.string() << '\n';
        }
    }

  private:
    fs::path dir_;
    json meta_;
    std::vector<std::pair<std::string, std::string>> files_;
};

OverlapFactors factors_at(const SpectrumConfig &lab, double dz) {
    return OverlapFactors::from_pair(
        packets_from_lab(dz, lab.lambda0_nm, lab.delta_lambda_nm, lab.l_c_um));
}

double indist_at(const SpectrumConfig &lab, double dz) {
    return indistinguishability(
        packets_from_lab(dz, lab.lambda0_nm, lab.delta_lambda_nm, lab.l_c_um));
}

void check(bool ok, const std::string &what) {
    if (!ok) {
        throw InternalCheckFailed(what);
    }
}

void check_distribution(const std::array<double, 5> &p, double phi, double dz) {
    double sum = 0.0;
    for (const double x : p) {
        check(std::isfinite(x) && x >= -1e-12 && x <= 1.0 + 1e-12,
              "probability outside [0, 1] at phi=" + num(phi) + ", dz=" + num(dz));
        sum += x;
    }
    check(std::abs(sum - 1.0) <= 1e-9,
          "probabilities do not sum to 1 at phi=" + num(phi) + ", dz=" + num(dz));
}

fs::path base_dir(const RunOptions &o) {
    const auto parent = o.config.parent_path();
    return parent.empty() ? fs::path(".") : parent;
}

void require_file(const fs::path &p) {
    if (!fs::is_regular_file(p)) {
        throw IoError("input file not found: " + p.string());
    }
}

// ---------------------------------------------------------------------------

void cmd_probmap(const RunOptions &o, const json &j, std::ostream &log) {
    json resolved;
    const auto cfg = parse_probmap(j, resolved);
    const auto n_phi = cfg.phi_rad.size();
    const auto n_z = cfg.delta_z_um.size();
    std::vector<std::array<double, 5>> values(n_phi * n_z);
    parallel_for(n_z, o.threads, [&](std::size_t iz) {
        const auto f = factors_at(cfg.lab, cfg.delta_z_um[iz]);
        for (std::size_t ip = 0; ip < n_phi; ++ip) {
            values[iz * n_phi + ip] = p4_values(cfg.phi_rad[ip] / 4.0, f);
        }
    });
    for (std::size_t k = 0; k < values.size(); ++k) {
        check_distribution(values[k], cfg.phi_rad[k % n_phi], cfg.delta_z_um[k / n_phi]);
    }

    Outputs out(o.out_dir, "probmap", resolved, std::nullopt);
    const std::vector<Column> columns{
        {"phi_rad", "rad"}, {"delta_z_um", "um"}, {"probability", "1"}};
    for (std::size_t m = 0; m < 5; ++m) {
        const std::string key = kFourPhotonKeys[m];
        std::string rows;
        for (std::size_t iz = 0; iz < n_z; ++iz) {
            for (std::size_t ip = 0; ip < n_phi; ++ip) {
                rows += num(cfg.phi_rad[ip]) + "," + num(cfg.delta_z_um[iz]) + "," +
                        num(values[iz * n_phi + ip][m]) + "\n";
            }
        }
        out.add_csv("probmap_p" + key, columns, rows, {{"outcome", key}});
    }
    for (const double dz : cfg.cuts_delta_z_um) {
        const auto f = factors_at(cfg.lab, dz);
        std::array<std::string, 5> rows;
        for (const double phi : cfg.phi_rad) {
            const auto p = p4_values(phi / 4.0, f);
            check_distribution(p, phi, dz);
            for (std::size_t m = 0; m < 5; ++m) {
                rows[m] += num(phi) + "," + num(dz) + "," + num(p[m]) + "\n";
            }
        }
        for (std::size_t m = 0; m < 5; ++m) {
            const std::string key = kFourPhotonKeys[m];
            out.add_csv("probmap_p" + key + "_dz" + label(dz), columns, rows[m],
                        {{"outcome", key}, {"cut_delta_z_um", dz}});
        }
    }
    out.flush(log);
}

void cmd_fisher_scan(const RunOptions &o, const json &j, std::ostream &log) {
    json resolved;
    const auto cfg = parse_fisher_scan(j, resolved);
    const LabParameters lab{0.0, cfg.lab.lambda0_nm, cfg.lab.delta_lambda_nm, cfg.lab.l_c_um};
    const auto scan = fisher_scan(cfg.phi_rad, cfg.delta_z_um, lab, o.threads);
    const auto n_phi = cfg.phi_rad.size();

    auto check_row = [&](double dz, const std::vector<double> &row) {
        const double bound = qfi_partial(4, indist_at(cfg.lab, dz)) + 1e-6;
        for (const double f : row) {
            check(std::isfinite(f) && f >= 0.0 && f <= bound,
                  "Fisher information out of range at dz=" + num(dz));
        }
    };

    Outputs out(o.out_dir, "fisher-scan", resolved, std::nullopt);
    const std::vector<Column> columns{
        {"phi_rad", "rad"}, {"delta_z_um", "um"}, {"fisher", "1/rad^2"}};
    std::string rows;
    json summary = json::array();
    for (std::size_t iz = 0; iz < cfg.delta_z_um.size(); ++iz) {
        const double dz = cfg.delta_z_um[iz];
        std::vector<double> row(n_phi);
        for (std::size_t ip = 0; ip < n_phi; ++ip) {
            row[ip] = scan.at(iz, ip).fisher;
            rows += num(cfg.phi_rad[ip]) + "," + num(dz) + "," + num(row[ip]) + "\n";
        }
        check_row(dz, row);
        const auto best = std::max_element(row.begin(), row.end());
        const auto f = factors_at(cfg.lab, dz);
        summary.push_back({{"delta_z_um", dz},
                           {"indistinguishability", indist_at(cfg.lab, dz)},
                           {"max_fisher", *best},
                           {"argmax_phi_rad", cfg.phi_rad[static_cast<std::size_t>(
                                                  best - row.begin())]},
                           {"fisher_at_half_pi", fisher(kPi / 8.0, f).fisher}});
    }
    out.add_csv("fisher_scan", columns, rows);

    for (const double dz : cfg.cuts_delta_z_um) {
        const auto f = factors_at(cfg.lab, dz);
        std::vector<double> row;
        std::string cut;
        for (const double phi : cfg.phi_rad) {
            row.push_back(fisher(phi / 4.0, f).fisher);
            cut += num(phi) + "," + num(dz) + "," + num(row.back()) + "\n";
        }
        check_row(dz, row);
        out.add_csv("fisher_scan_dz" + label(dz), columns, cut, {{"cut_delta_z_um", dz}});
    }
    out.add_json("fisher_summary.json",
                 {{"rows", summary},
                  {"units", {{"delta_z_um", "um"},
                             {"max_fisher", "1/rad^2"},
                             {"argmax_phi_rad", "rad"},
                             {"fisher_at_half_pi", "1/rad^2"}}}});
    out.flush(log);
}

HomDipData read_hom_dip_csv(const fs::path &path) {
    require_file(path);
    std::ifstream in(path, std::ios::binary);
    std::string line;
    HomDipData data;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header) {
            if (line != "delta_z_um,pairs,coincidences") {
                throw DataFormatError(path.string() +
                                      ": expected header delta_z_um,pairs,coincidences");
            }
            header = true;
            continue;
        }
        const auto fields = io::detail::split_commas(line);
        if (fields.size() != 3) {
            throw DataFormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 3 fields");
        }
        data.delta_z_um.push_back(io::detail::parse_number<double>(fields[0], line_no));
        data.pairs.push_back(io::detail::parse_number<std::int64_t>(fields[1], line_no));
        data.coincidences.push_back(io::detail::parse_number<std::int64_t>(fields[2], line_no));
    }
    if (!header) {
        throw DataFormatError(path.string() + ": file is empty");
    }
    data.validate();
    return data;
}

void cmd_hom_dip(const RunOptions &o, const json &j, std::ostream &log) {
    json resolved;
    const auto cfg = parse_hom_dip(j, o.seed, base_dir(o), resolved);
    const auto data = cfg.input ? read_hom_dip_csv(*cfg.input)
                                : simulate_hom_dip(*cfg.truth, cfg.delta_z_um,
                                                   cfg.pairs_per_point, cfg.seed);
    const auto fit = hom_dip_fit(data, cfg.l_c_guess_um);
    check(fit.model.visibility >= 0.0 && fit.model.visibility <= 1.0,
          "visibility outside [0, 1]");

    Outputs out(o.out_dir, "hom-dip", resolved,
                cfg.input ? std::nullopt : std::optional<std::uint64_t>(cfg.seed));
    std::string rows;
    for (std::size_t i = 0; i < data.delta_z_um.size(); ++i) {
        rows += num(data.delta_z_um[i]) + "," + std::to_string(data.pairs[i]) + "," +
                std::to_string(data.coincidences[i]) + "," +
                num(fit.model.coincidence_probability(data.delta_z_um[i])) + "\n";
    }
    out.add_csv("hom_dip",
                {{"delta_z_um", "um"},
                 {"pairs", "counts"},
                 {"coincidences", "counts"},
                 {"fitted_probability", "1"}},
                rows);
    out.add_json("hom_dip_fit.json",
                 {{"result",
                   {{"visibility", fit.model.visibility},
                    {"indistinguishability", fit.model.visibility},
                    {"center_um", fit.model.center_um},
                    {"l_c_um", fit.model.l_c_um},
                    {"residual", fit.residual},
                    {"n_evaluations", fit.n_evaluations},
                    {"converged", fit.converged}}},
                  {"units",
                   {{"visibility", "1"}, {"center_um", "um"}, {"l_c_um", "um"}}}});
    out.flush(log);
}

void cmd_simulate(const RunOptions &o, const json &j, std::ostream &log) {
    json resolved;
    const auto cfg = parse_simulate(j, o.seed, resolved);
    auto data = simulate_counts(cfg.model, cfg.theta_rad, cfg.mean_events_per_setting,
                                cfg.seed, o.threads);
    data.acquisition = cfg.acquisition;
    data.validate();

    Outputs out(o.out_dir, "simulate", resolved, cfg.seed);
    json side = out.meta();
    side.update(io::counts_sidecar(data));
    side["file"] = "counts.csv";
    side["columns"] = {"theta_rad", "n40", "n04", "n31", "n13", "n22"};
    out.add_raw("counts.csv", io::counts_csv(data));
    out.add_raw("counts.json", side.dump(2) + "\n");
    out.flush(log);
}

json fit_json(const FitResult &fit) {
    return {{"delta_z_um", fit.delta_z_um},
            {"delta_lambda_nm", fit.delta_lambda_nm},
            {"background", fit.background},
            {"lambda0_nm", fit.lambda0_nm},
            {"l_c_um", fit.l_c_um},
            {"indistinguishability", fit.indistinguishability()},
            {"residual", fit.residual},
            {"n_evaluations", fit.n_evaluations},
            {"n_restarts", fit.n_restarts},
            {"converged", fit.converged}};
}

json fit_units() {
    return {{"delta_z_um", "um"},     {"delta_lambda_nm", "nm"}, {"background", "1"},
            {"lambda0_nm", "nm"},     {"l_c_um", "um"},          {"indistinguishability", "1"},
            {"residual", "chi^2"}};
}

CountsDataset load_counts(const fs::path &p) {
    require_file(p);
    return io::read_counts(p);
}

void cmd_fit(const RunOptions &o, const json &j, std::ostream &log) {
    json resolved;
    const auto cfg = parse_fit(j, base_dir(o), resolved);
    const auto data = load_counts(cfg.data);
    const auto fit = fit_counts(data, cfg.fit);
    check(fit.delta_z_um >= 0.0 && fit.background >= 0.0 && fit.background < 1.0,
          "fitted parameters outside their domain");

    Outputs out(o.out_dir, "fit", resolved, data.rng_seed);
    out.add_json("fit.json", {{"result", fit_json(fit)},
                              {"units", fit_units()},
                              {"settings", data.size()}});
    out.flush(log);
}

void cmd_mc_band(const RunOptions &o, const json &j, std::ostream &log) {
    json resolved;
    const auto cfg = parse_mc_band(j, o.seed, base_dir(o), resolved);
    const auto data = load_counts(cfg.data);
    const auto fit = fit_counts(data, cfg.fit);
    const auto band =
        mc_fisher_band(fit, data, cfg.fit, cfg.n_resamples, cfg.phi_rad, cfg.seed, o.threads);

    std::string rows;
    for (std::size_t k = 0; k < band.phi.size(); ++k) {
        check(band.lower[k] <= band.mean[k] && band.mean[k] <= band.upper[k],
              "band ordering violated");
        rows += num(band.phi[k]) + "," + num(band.nominal[k]) + "," + num(band.mean[k]) + "," +
                num(band.stddev[k]) + "," + num(band.lower[k]) + "," + num(band.upper[k]) +
                "\n";
    }
    const auto best = static_cast<std::size_t>(
        std::max_element(band.mean.begin(), band.mean.end()) - band.mean.begin());

    Outputs out(o.out_dir, "mc-band", resolved, cfg.seed);
    out.add_csv("fisher_band",
                {{"phi_rad", "rad"},
                 {"nominal", "1/rad^2"},
                 {"mean", "1/rad^2"},
                 {"stddev", "1/rad^2"},
                 {"lower", "1/rad^2"},
                 {"upper", "1/rad^2"}},
                rows,
                {{"fit", fit_json(fit)},
                 {"summary",
                  {{"max_mean_fisher", band.mean[best]},
                   {"argmax_phi_rad", band.phi[best]},
                   {"stddev_at_max", band.stddev[best]},
                   {"n_resamples", band.n_resamples},
                   {"n_failed", band.n_failed}}},
                 {"data_seed", data.rng_seed}});
    out.flush(log);
}

} // namespace

void execute(const RunOptions &options, std::ostream &log) {
    const auto &names = command_names();
    if (std::find(names.begin(), names.end(), options.command) == names.end()) {
        throw std::invalid_argument("unknown command '" + options.command + "'");
    }
    if (options.threads == 0) {
        throw ConfigError("--threads must be at least 1");
    }
    const json j = load_json(options.config);
    if (options.command == "probmap") {
        cmd_probmap(options, j, log);
    } else if (options.command == "fisher-scan") {
        cmd_fisher_scan(options, j, log);
    } else if (options.command == "hom-dip") {
        cmd_hom_dip(options, j, log);
    } else if (options.command == "simulate") {
        cmd_simulate(options, j, log);
    } else if (options.command == "fit") {
        cmd_fit(options, j, log);
    } else {
        cmd_mc_band(options, j, log);
    }
}

int run(const RunOptions &options, std::ostream &log, std::ostream &err) {
    const auto fail = [&](int code, const char *kind, const std::exception &e) {
        err << "hompol-cli " << options.command << ": " << kind << ": " << e.what() << '\n';
        return code;
    };
    try {
        execute(options, log);
        return kOk;
    } catch (const ConfigError &e) {
        return fail(kConfigError, "config error", e);
    } catch (const IoError &e) {
        return fail(kIoError, "i/o error", e);
    } catch (const DataFormatError &e) {
        return fail(kDataError, "data error", e);
    } catch (const FitNotConverged &e) {
        return fail(kNotConverged, "not converged", e);
    } catch (const QuadratureNotConverged &e) {
        return fail(kNotConverged, "not converged", e);
    } catch (const DegenerateData &e) {
        return fail(kDegenerate, "degenerate data", e);
    } catch (const InternalCheckFailed &e) {
        return fail(kInternal, "internal check failed", e);
    } catch (const std::invalid_argument &e) {
        return fail(kConfigError, "invalid parameter", e);
    } catch (const std::exception &e) {
        return fail(kInternal, "error", e);
    }
}

} // namespace hompol::cli
