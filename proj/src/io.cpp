#include "pstomo/io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pstomo/errors.hpp"

namespace pstomo::io {

namespace {

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    for (const char* key : required) {
        if (!j.contains(key)) throw SchemaError(where + ": missing key \"" + key + "\"");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : required) known = known || it.key() == key;
        for (const char* key : optional) known = known || it.key() == key;
        if (!known) throw SchemaError(where + ": unknown key \"" + it.key() + "\"");
    }
}

json complex_to_json(const cx& c) { return json::array({c.real(), c.imag()}); }

cx complex_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw SchemaError(where + ": complex entries must be [re, im] number pairs");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json vector_to_json(const std::vector<cx>& v) {
    json out = json::array();
    for (const cx& c : v) out.push_back(complex_to_json(c));
    return out;
}

std::vector<cx> vector_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected an array");
    std::vector<cx> out;
    out.reserve(j.size());
    for (const json& e : j) out.push_back(complex_from_json(e, where));
    return out;
}

PairBasisParams params_from_json(const json& j, const std::string& where) {
    require_keys(j, {"a", "b", "phases"}, {}, where);
    PairBasisParams p;
    if (!j["a"].is_number() || !j["b"].is_number()) {
        throw SchemaError(where + ": a and b must be numbers");
    }
    p.a = j["a"].get<double>();
    p.b = j["b"].get<double>();
    if (!j["phases"].is_array()) throw SchemaError(where + ": phases must be an array");
    for (const json& e : j["phases"]) {
        if (!e.is_number()) throw SchemaError(where + ": phases must be numbers");
        p.phases.push_back(e.get<double>());
    }
    return p;
}

json params_to_json(const PairBasisParams& p) {
    return json{{"a", p.a}, {"b", p.b}, {"phases", p.phases}};
}

}  // namespace

json counts_file_to_json(const CountsFile& file) {
    json records = json::array();
    for (const CountRecord& rec : file.records) {
        records.push_back(json{{"basis", rec.basis_id}, {"counts", rec.counts}, {"shots", rec.shots}});
    }
    return json{{"dimension", file.dimension},
                {"basis_params", params_to_json(file.params)},
                {"records", records}};
}

CountsFile counts_file_from_json(const json& j) {
    require_keys(j, {"dimension", "basis_params", "records"}, {}, "counts file");
    CountsFile file;
    if (!j["dimension"].is_number_integer()) throw SchemaError("counts file: dimension must be an integer");
    file.dimension = j["dimension"].get<int>();
    if (file.dimension < 4 || file.dimension % 2 != 0) {
        throw SchemaError("counts file: dimension must be an even integer >= 4");
    }
    file.params = params_from_json(j["basis_params"], "counts file: basis_params");
    if (static_cast<int>(file.params.phases.size()) != file.dimension / 2) {
        throw SchemaError("counts file: basis_params.phases must have d/2 entries");
    }
    if (!j["records"].is_array()) throw SchemaError("counts file: records must be an array");

    std::array<bool, 3> seen{false, false, false};
    for (const json& r : j["records"]) {
        require_keys(r, {"basis", "counts", "shots"}, {}, "counts file: record");
        if (!r["basis"].is_string()) throw SchemaError("counts file: record basis must be a string");
        std::string id = r["basis"].get<std::string>();
        int slot;
        if (id == "B0") slot = 0;
        else if (id == "B1p") slot = 1;
        else if (id == "B3p") slot = 2;
        else throw SchemaError("counts file: unknown basis \"" + id + "\"");
        if (seen[static_cast<std::size_t>(slot)]) {
            throw SchemaError("counts file: duplicate record for " + id);
        }
        seen[static_cast<std::size_t>(slot)] = true;

        CountRecord rec;
        rec.basis_id = id;
        if (!r["counts"].is_array() || static_cast<int>(r["counts"].size()) != file.dimension) {
            throw SchemaError("counts file: record " + id + " needs exactly d counts");
        }
        std::int64_t sum = 0;
        for (const json& c : r["counts"]) {
            if (!c.is_number_integer() || c.get<std::int64_t>() < 0) {
                throw SchemaError("counts file: record " + id + " counts must be nonnegative integers");
            }
            rec.counts.push_back(c.get<std::int64_t>());
            sum += rec.counts.back();
        }
        if (!r["shots"].is_number_integer()) {
            throw SchemaError("counts file: record " + id + " shots must be an integer");
        }
        rec.shots = r["shots"].get<std::int64_t>();
        if (rec.shots < 1) throw SchemaError("counts file: record " + id + " needs shots >= 1");
        if (rec.shots != sum) {
            throw SchemaError("counts file: record " + id + " shots do not equal the count sum");
        }
        file.records[static_cast<std::size_t>(slot)] = std::move(rec);
    }
    for (int slot = 0; slot < 3; ++slot) {
        if (!seen[static_cast<std::size_t>(slot)]) {
            static const char* names[] = {"B0", "B1p", "B3p"};
            throw SchemaError(std::string("counts file: missing record for ") + names[slot]);
        }
    }
    return file;
}

json basis_set_to_json(const ThreeBasisSet& set) {
    return json{{"dimension", set.dim()},
                {"a", set.params.a},
                {"b", set.params.b},
                {"phases", set.params.phases},
                {"randomized", set.randomized},
                {"vectors",
                 json{{"B0", [&] {
                           json v = json::array();
                           for (const auto& x : set.canonical.vectors) v.push_back(vector_to_json(x));
                           return v;
                       }()},
                      {"B1p", [&] {
                           json v = json::array();
                           for (const auto& x : set.b1p.vectors) v.push_back(vector_to_json(x));
                           return v;
                       }()},
                      {"B3p", [&] {
                           json v = json::array();
                           for (const auto& x : set.b3p.vectors) v.push_back(vector_to_json(x));
                           return v;
                       }()}}}};
}

ThreeBasisSet basis_set_from_json(const json& j) {
    require_keys(j, {"dimension", "a", "b", "phases", "randomized", "vectors"}, {}, "basis set");
    const int d = j["dimension"].get<int>();
    ThreeBasisSet set;
    set.params.a = j["a"].get<double>();
    set.params.b = j["b"].get<double>();
    for (const json& e : j["phases"]) set.params.phases.push_back(e.get<double>());
    set.randomized = j["randomized"].get<bool>();
    require_keys(j["vectors"], {"B0", "B1p", "B3p"}, {}, "basis set: vectors");

    auto load = [&](const char* id) {
        OrthonormalBasis b;
        b.id = id;
        b.dim = d;
        for (const json& v : j["vectors"][id]) {
            b.vectors.push_back(vector_from_json(v, std::string("basis set: ") + id));
            if (static_cast<int>(b.vectors.back().size()) != d) {
                throw SchemaError(std::string("basis set: ") + id + " vector has wrong length");
            }
        }
        if (b.size() != d) throw SchemaError(std::string("basis set: ") + id + " needs d vectors");
        return b;
    };
    set.canonical = load("B0");
    set.b1p = load("B1p");
    set.b3p = load("B3p");
    for (int k = 0; k < d; ++k) {
        set.canonical.roles.push_back(VectorRole::Canonical);
        bool completion = k >= d / 2;
        set.b1p.roles.push_back(completion ? VectorRole::Completion : VectorRole::PairPlus);
        set.b3p.roles.push_back(completion ? VectorRole::Completion : VectorRole::PairPlus);
    }
    return set;
}

json report_to_json(const EstimationReport& report, std::optional<double> truth_infidelity) {
    json flags{{"ambiguous_support", report.flags.ambiguous_support},
               {"equal_pairs_detected", report.flags.equal_pairs_detected},
               {"likelihood_tie", report.flags.likelihood_tie},
               {"retries_exhausted", report.flags.retries_exhausted},
               {"clamped_k", report.flags.clamped_k}};
    std::size_t top = std::min<std::size_t>(report.loglik_ranking.size(), 16);
    std::vector<double> ranking(report.loglik_ranking.begin(),
                                report.loglik_ranking.begin() + static_cast<std::ptrdiff_t>(top));
    json out{{"dimension", report.estimate.dim()},
             {"estimate", vector_to_json(report.estimate.amps)},
             {"chosen_signs", report.chosen_signs},
             {"loglik_top", ranking},
             {"flags", flags},
             {"retries", report.retries},
             {"basis", basis_set_to_json(report.bases)}};
    if (truth_infidelity) out["truth_infidelity"] = *truth_infidelity;
    return out;
}

SweepConfig sweep_config_from_json(const json& j) {
    require_keys(j, {"dimensions", "shots", "seed"}, {"states", "trials", "method", "retries"},
                 "sweep config");
    SweepConfig cfg;
    if (!j["dimensions"].is_array()) throw SchemaError("sweep config: dimensions must be an array");
    for (const json& e : j["dimensions"]) {
        if (!e.is_number_integer()) throw SchemaError("sweep config: dimensions must be integers");
        cfg.dimensions.push_back(e.get<int>());
    }
    if (!j["shots"].is_array()) throw SchemaError("sweep config: shots must be an array");
    for (const json& e : j["shots"]) {
        if (!e.is_number_integer()) throw SchemaError("sweep config: shots must be integers");
        cfg.shots_grid.push_back(e.get<std::int64_t>());
    }
    if (!j["seed"].is_number_integer()) throw SchemaError("sweep config: seed must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("states")) cfg.states = j["states"].get<int>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("retries")) cfg.retries = j["retries"].get<int>();
    if (j.contains("method")) {
        std::string m = j["method"].get<std::string>();
        if (m == "3bb") cfg.method = Method::ThreeBB;
        else if (m == "5bb") cfg.method = Method::FiveBB;
        else throw SchemaError("sweep config: method must be \"3bb\" or \"5bb\"");
    }
    return cfg;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "d,N,total_ensemble,mean,median,q25,q75,omega_f_fraction,omega_f_mean,"
           "complement_mean,failures\n";
    for (const SweepRow& r : rows) {
        out << r.d << ',' << r.shots << ',' << r.total_ensemble << ',' << fmt_double(r.mean) << ','
            << fmt_double(r.median) << ',' << fmt_double(r.q25) << ',' << fmt_double(r.q75) << ','
            << fmt_double(r.omega_f_fraction) << ',' << fmt_double(r.omega_f_mean) << ','
            << fmt_double(r.complement_mean) << ',' << r.failures << '\n';
    }
    return out.str();
}

namespace {

cx parse_complex_token(std::string tok) {
    auto fail = [&]() -> cx {
        throw SchemaError("bad complex literal \"" + tok + "\"");
    };
    std::erase_if(tok, [](unsigned char c) { return std::isspace(c); });
    if (tok.empty()) return fail();

    // A bare "i" with optional sign.
    auto parse_unit_imag = [](const std::string& s, double& out) {
        if (s == "i" || s == "+i") { out = 1.0; return true; }
        if (s == "-i") { out = -1.0; return true; }
        return false;
    };
    double im_unit;
    if (parse_unit_imag(tok, im_unit)) return {0.0, im_unit};

    const char* begin = tok.c_str();
    char* end = nullptr;
    double first = std::strtod(begin, &end);
    if (end == begin) return fail();
    if (*end == '\0') return {first, 0.0};
    if (*end == 'i' && *(end + 1) == '\0') return {0.0, first};
    if (*end != '+' && *end != '-') return fail();

    std::string rest(end);
    if (parse_unit_imag(rest, im_unit)) return {first, im_unit};
    char* end2 = nullptr;
    double second = std::strtod(end, &end2);
    if (end2 == end || *end2 != 'i' || *(end2 + 1) != '\0') return fail();
    return {first, second};
}

}  // namespace

std::vector<cx> parse_state_literal(const std::string& text) {
    std::vector<cx> out;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) out.push_back(parse_complex_token(tok));
    if (out.empty()) throw SchemaError("state literal is empty");
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw SchemaError("JSON parse error in " + path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << text;
}

}  // namespace pstomo::io
