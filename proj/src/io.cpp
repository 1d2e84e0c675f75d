#include "fdsweep/io.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace fdsweep {

namespace {

using nlohmann::ordered_json;

ordered_json complex_to_json(Complex z) {
    return ordered_json::array({z.real(), z.imag()});
}

Complex complex_from_json(const ordered_json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw IoError("schema: expected [re, im] pair at " + path);
    }
    return Complex(j[0].get<double>(), j[1].get<double>());
}

// Thresholds may be infinite; JSON has no literal for that, so infinities
// are stored as the string "inf".
ordered_json finite_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_or_inf(const ordered_json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw IoError("schema: expected number or \"inf\" at " + path);
}

const ordered_json& require(const ordered_json& j, const char* key,
                            const std::string& path) {
    if (!j.contains(key)) throw IoError("schema: missing field " + path + "/" + key);
    return j[key];
}

double require_number(const ordered_json& j, const char* key,
                      const std::string& path) {
    const ordered_json& v = require(j, key, path);
    if (!v.is_number()) throw IoError("schema: expected number at " + path + "/" + key);
    return v.get<double>();
}

int require_int(const ordered_json& j, const char* key, const std::string& path) {
    const ordered_json& v = require(j, key, path);
    if (!v.is_number_integer()) {
        throw IoError("schema: expected integer at " + path + "/" + key);
    }
    return v.get<int>();
}

std::vector<int> require_int_array(const ordered_json& j, const char* key,
                                   const std::string& path) {
    const ordered_json& v = require(j, key, path);
    if (!v.is_array()) throw IoError("schema: expected array at " + path + "/" + key);
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) {
            throw IoError("schema: expected integer elements at " + path + "/" + key);
        }
        out.push_back(e.get<int>());
    }
    return out;
}

ordered_json config_to_json(const AfsConfig& cfg) {
    ordered_json j;
    j["initial_count"] = cfg.initial_count;
    j["alpha_high"] = cfg.alpha_high;
    j["alpha_low"] = cfg.alpha_low;
    j["e1_threshold"] = finite_or_inf(cfg.e1_threshold);
    j["e2_threshold"] = finite_or_inf(cfg.e2_threshold);
    j["validation_steps"] = cfg.validation_steps;
    j["orf"] = cfg.orf_indices;
    j["test"] = cfg.test_indices;
    j["omega_max"] = cfg.omega_max;
    j["eta"] = cfg.eta;
    j["period"] = cfg.period;
    j["grid_points"] = cfg.grid_points;
    j["time_points"] = cfg.time_points;
    j["max_iterations"] = cfg.max_iterations;
    j["seed"] = cfg.seed;
    j["n_relocations"] = cfg.n_relocations;
    return j;
}

AfsConfig config_from_json(const ordered_json& j, const std::string& path) {
    AfsConfig cfg;
    cfg.initial_count = require_int(j, "initial_count", path);
    cfg.alpha_high = require_number(j, "alpha_high", path);
    cfg.alpha_low = require_number(j, "alpha_low", path);
    cfg.e1_threshold = number_or_inf(require(j, "e1_threshold", path), path + "/e1_threshold");
    cfg.e2_threshold = number_or_inf(require(j, "e2_threshold", path), path + "/e2_threshold");
    cfg.validation_steps = require_int(j, "validation_steps", path);
    cfg.orf_indices = require_int_array(j, "orf", path);
    cfg.test_indices = require_int_array(j, "test", path);
    cfg.omega_max = require_number(j, "omega_max", path);
    cfg.eta = require_number(j, "eta", path);
    cfg.period = require_number(j, "period", path);
    cfg.grid_points = require_int(j, "grid_points", path);
    cfg.time_points = require_int(j, "time_points", path);
    cfg.max_iterations = require_int(j, "max_iterations", path);
    if (!require(j, "seed", path).is_number_unsigned()) {
        throw IoError("schema: expected unsigned integer at " + path + "/seed");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.n_relocations = require_int(j, "n_relocations", path);
    return cfg;
}

ordered_json model_to_json_value(const RationalModel& model) {
    ordered_json j;
    j["poles"] = ordered_json::array();
    for (Complex p : model.poles) j["poles"].push_back(complex_to_json(p));
    j["residues"] = ordered_json::object();
    for (int k = 0; k < model.channel_count(); ++k) {
        ordered_json row = ordered_json::array();
        for (Complex r : model.residues[k]) row.push_back(complex_to_json(r));
        j["residues"][model.channel_labels.at(k)] = std::move(row);
    }
    return j;
}

RationalModel model_from_json_value(const ordered_json& j, const std::string& path) {
    RationalModel model;
    const ordered_json& poles = require(j, "poles", path);
    if (!poles.is_array()) throw IoError("schema: expected array at " + path + "/poles");
    for (std::size_t m = 0; m < poles.size(); ++m) {
        model.poles.push_back(
            complex_from_json(poles[m], path + "/poles/" + std::to_string(m)));
    }
    const ordered_json& residues = require(j, "residues", path);
    if (!residues.is_object()) {
        throw IoError("schema: expected object at " + path + "/residues");
    }
    for (const auto& [label, row] : residues.items()) {
        const std::string row_path = path + "/residues/" + label;
        if (!row.is_array() || row.size() != model.poles.size()) {
            throw IoError("schema: residue row at " + row_path +
                          " must match the pole count");
        }
        model.channel_labels.push_back(label);
        std::vector<Complex> values;
        for (std::size_t m = 0; m < row.size(); ++m) {
            values.push_back(
                complex_from_json(row[m], row_path + "/" + std::to_string(m)));
        }
        model.residues.push_back(std::move(values));
    }
    return model;
}

ordered_json parse_json(const std::string& text, const char* what) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string(what) + ": not valid JSON: " + e.what());
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

void save_archive(const SweepArchive& archive, const std::filesystem::path& path) {
    ordered_json j;
    j["version"] = archive.version;
    j["config"] = config_to_json(archive.config);
    j["n_c"] = archive.samples.size();
    j["samples"] = ordered_json::array();
    for (const auto& smp : archive.samples) {
        ordered_json js;
        js["s"] = complex_to_json(smp.s);
        js["values"] = ordered_json::array();
        for (Complex v : smp.values) js["values"].push_back(complex_to_json(v));
        j["samples"].push_back(std::move(js));
    }
    j["model"] = archive.model ? model_to_json_value(*archive.model)
                               : ordered_json(nullptr);
    write_file_atomic(path, j.dump(2) + "\n");
}

SweepArchive load_archive(const std::filesystem::path& path) {
    const ordered_json j = parse_json(read_file(path), "archive");
    SweepArchive archive;
    archive.version = require_int(j, "version", "");
    if (archive.version != kArchiveVersion) {
        throw IoError("archive version mismatch: file has version " +
                      std::to_string(archive.version) + ", this build reads " +
                      std::to_string(kArchiveVersion));
    }
    const ordered_json& config = require(j, "config", "");
    archive.config = config_from_json(config, "/config");
    const ordered_json& samples = require(j, "samples", "");
    if (!samples.is_array()) throw IoError("schema: expected array at /samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::string path_i = "/samples/" + std::to_string(i);
        const ordered_json& js = samples[i];
        FrequencySample smp;
        smp.s = complex_from_json(require(js, "s", path_i), path_i + "/s");
        const ordered_json& values = require(js, "values", path_i);
        if (!values.is_array()) {
            throw IoError("schema: expected array at " + path_i + "/values");
        }
        for (std::size_t v = 0; v < values.size(); ++v) {
            smp.values.push_back(complex_from_json(
                values[v], path_i + "/values/" + std::to_string(v)));
        }
        archive.samples.push_back(std::move(smp));
    }
    const int recorded = require_int(j, "n_c", "");
    if (recorded != static_cast<int>(archive.samples.size())) {
        throw IoError("schema: recorded n_c (" + std::to_string(recorded) +
                      ") does not match the sample count (" +
                      std::to_string(archive.samples.size()) + ")");
    }
    const ordered_json& model = require(j, "model", "");
    if (!model.is_null()) {
        archive.model = model_from_json_value(model, "/model");
    }
    return archive;
}

std::string model_to_json(const RationalModel& model) {
    return model_to_json_value(model).dump(2) + "\n";
}

RationalModel model_from_json(const std::string& json_text) {
    return model_from_json_value(parse_json(json_text, "model"), "");
}

void save_model(const RationalModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(model));
}

RationalModel load_model(const std::filesystem::path& path) {
    return model_from_json(read_file(path));
}

std::string spectrum_csv(std::span<const FrequencySample> samples,
                         std::span<const std::string> channel_labels) {
    if (samples.empty()) throw ValidationError("spectrum_csv: no samples");
    for (const auto& smp : samples) {
        if (smp.values.size() != channel_labels.size()) {
            throw ValidationError("spectrum_csv: label count mismatch");
        }
    }
    std::vector<std::size_t> sample_order(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) sample_order[i] = i;
    std::stable_sort(sample_order.begin(), sample_order.end(),
                     [&samples](std::size_t a, std::size_t b) {
                         return samples[a].s.imag() < samples[b].s.imag();
                     });
    std::vector<std::size_t> label_order(channel_labels.size());
    for (std::size_t k = 0; k < channel_labels.size(); ++k) label_order[k] = k;
    std::stable_sort(label_order.begin(), label_order.end(),
                     [&channel_labels](std::size_t a, std::size_t b) {
                         return channel_labels[a] < channel_labels[b];
                     });
    std::string out = "omega,channel,re,im,abs\n";
    for (std::size_t i : sample_order) {
        for (std::size_t k : label_order) {
            const Complex v = samples[i].values[k];
            out += format_double(samples[i].s.imag());
            out += ',';
            out += channel_labels[k];
            out += ',';
            out += format_double(v.real());
            out += ',';
            out += format_double(v.imag());
            out += ',';
            out += format_double(std::abs(v));
            out += '\n';
        }
    }
    return out;
}

std::string timeseries_csv(const TimeSeries& series) {
    if (series.t.empty()) throw ValidationError("timeseries_csv: empty series");
    if (series.channel_labels.size() != series.channel_count()) {
        throw ValidationError("timeseries_csv: label count mismatch");
    }
    std::string out = "t";
    for (const auto& label : series.channel_labels) {
        out += ',';
        out += label;
    }
    out += '\n';
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        out += format_double(series.t[i]);
        for (std::size_t k = 0; k < series.channel_count(); ++k) {
            out += ',';
            out += format_double(series.values[k][i]);
        }
        out += '\n';
    }
    return out;
}

TimeSeries parse_timeseries_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("time-series CSV: empty file");
    TimeSeries series;
    {
        std::istringstream header(line);
        std::string field;
        if (!std::getline(header, field, ',') || field != "t") {
            throw IoError("time-series CSV: header must start with 't'");
        }
        while (std::getline(header, field, ',')) {
            series.channel_labels.push_back(field);
        }
    }
    series.values.resize(series.channel_labels.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::size_t column = 0;
        while (std::getline(row, field, ',')) {
            std::size_t consumed = 0;
            double value = 0.0;
            try {
                value = std::stod(field, &consumed);
            } catch (const std::exception&) {
                throw IoError("time-series CSV: bad number '" + field + "'");
            }
            if (consumed != field.size()) {
                throw IoError("time-series CSV: bad number '" + field + "'");
            }
            if (column == 0) {
                series.t.push_back(value);
            } else if (column <= series.values.size()) {
                series.values[column - 1].push_back(value);
            } else {
                throw IoError("time-series CSV: too many columns in a row");
            }
            ++column;
        }
        if (column != series.values.size() + 1) {
            throw IoError("time-series CSV: short row");
        }
    }
    return series;
}

TimeSeries load_timeseries_csv(const std::filesystem::path& path) {
    return parse_timeseries_csv(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string content_hash(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << hash;
    return os.str();
}

}  // namespace fdsweep
