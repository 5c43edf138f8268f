#pragma once

// CountsDataset files: a CSV with header theta_rad,n40,n04,n31,n13,n22 and
// a JSON sidecar {seed, acquisition, units} next to it (same stem, .json).

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hompol/error.hpp"
#include "hompol/experiment.hpp"

namespace hompol::io {

inline constexpr std::string_view kCountsHeader = "theta_rad,n40,n04,n31,n13,n22";

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path &csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

template <class T>
T parse_number(std::string_view text, std::size_t line_no) {
    text = trim(text);
    T value{};
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw DataFormatError("line " + std::to_string(line_no) + ": cannot parse '" +
                              std::string(text) + "'");
    }
    return value;
}

} // namespace detail

inline nlohmann::json counts_sidecar(const CountsDataset &data) {
    nlohmann::json j;
    j["seed"] = data.rng_seed;
    if (data.acquisition) {
        j["acquisition"] = {{"rate_hz", data.acquisition->rate_hz},
                            {"duration_s", data.acquisition->duration_s}};
    } else {
        j["acquisition"] = nullptr;
    }
    j["units"] = {{"theta_rad", "rad"}, {"n40", "counts"}, {"n04", "counts"},
                  {"n31", "counts"},    {"n13", "counts"}, {"n22", "counts"}};
    return j;
}

inline std::string counts_csv(const CountsDataset &data) {
    std::ostringstream out;
    out << kCountsHeader << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << format_double(data.theta[i]);
        for (const auto c : data.counts[i]) {
            out << ',' << c;
        }
        out << '\n';
    }
    return out.str();
}

inline CountsDataset parse_counts_csv(std::istream &in) {
    CountsDataset data;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::trim(line);
        if (view.empty()) {
            continue;
        }
        if (!header_seen) {
            if (view != kCountsHeader) {
                throw DataFormatError("expected header '" + std::string(kCountsHeader) +
                                      "', got '" + std::string(view) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_commas(view);
        if (fields.size() != 6) {
            throw DataFormatError("line " + std::to_string(line_no) +
                                  ": expected 6 fields, got " +
                                  std::to_string(fields.size()));
        }
        data.theta.push_back(detail::parse_number<double>(fields[0], line_no));
        CountRow row{};
        for (std::size_t k = 0; k < 5; ++k) {
            row[k] = detail::parse_number<std::int64_t>(fields[k + 1], line_no);
            if (row[k] < 0) {
                throw DataFormatError("line " + std::to_string(line_no) +
                                      ": negative count");
            }
        }
        data.counts.push_back(row);
    }
    if (!header_seen) {
        throw DataFormatError("counts file is empty");
    }
    return data;
}

inline void apply_sidecar(const nlohmann::json &j, CountsDataset &data) {
    try {
        data.rng_seed = j.at("seed").get<std::uint64_t>();
        const auto &acq = j.at("acquisition");
        if (acq.is_null()) {
            data.acquisition.reset();
        } else {
            data.acquisition = Acquisition{acq.at("rate_hz").get<double>(),
                                           acq.at("duration_s").get<double>()};
        }
    } catch (const nlohmann::json::exception &e) {
        throw DataFormatError(std::string("invalid counts sidecar: ") + e.what());
    }
}

/// Writes the CSV and its sidecar. `extra` is merged into the sidecar.
inline void write_counts(const std::filesystem::path &csv, const CountsDataset &data,
                         const nlohmann::json &extra = nlohmann::json::object()) {
    std::ofstream out(csv, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + csv.string() + " for writing");
    }
    out << counts_csv(data);
    auto sidecar = counts_sidecar(data);
    sidecar.update(extra);
    std::ofstream side(sidecar_path(csv), std::ios::binary);
    side << sidecar.dump(2) << '\n';
}

/// Reads a counts CSV; the sidecar is applied when present.
inline CountsDataset read_counts(const std::filesystem::path &csv) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + csv.string());
    }
    auto data = parse_counts_csv(in);
    const auto side = sidecar_path(csv);
    if (std::filesystem::exists(side)) {
        std::ifstream sin(side, std::ios::binary);
        nlohmann::json j;
        try {
            sin >> j;
        } catch (const nlohmann::json::exception &e) {
            throw DataFormatError("cannot parse " + side.string() + ": " + e.what());
        }
        apply_sidecar(j, data);
    }
    return data;
}

} // namespace hompol::io
