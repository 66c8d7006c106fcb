#include "scenario.hpp"

#include "qmap/error.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace qmap::cli {

std::string to_string(Kind kind) {
    switch (kind) {
    case Kind::SingleMap:
        return "single_map";
    case Kind::Sequence:
        return "sequence";
    case Kind::Cycle:
        return "cycle";
    case Kind::Lindblad:
        return "lindblad";
    case Kind::FtCheck:
        return "ft_check";
    }
    return "unknown";
}

std::string format(const Diagnostic& d, const std::string& file) {
    std::ostringstream os;
    os << file;
    if (d.line > 0) {
        os << ":" << d.line;
    }
    os << ": ";
    if (!d.path.empty()) {
        os << d.path << ": ";
    }
    os << d.message;
    return os.str();
}

namespace {

std::string join_messages(const std::vector<Diagnostic>& ds) {
    std::ostringstream os;
    for (std::size_t k = 0; k < ds.size(); ++k) {
        if (k > 0) {
            os << "; ";
        }
        os << format(ds[k], "scenario");
    }
    return os.str();
}

}  // namespace

SchemaError::SchemaError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_messages(diagnostics)), diagnostics_(std::move(diagnostics)) {}

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> defaults{
        {"kraus", 1e-10},        {"first_law", 1e-9},  {"balance", 1e-9},   {"positivity", 1e-9},
        {"class", 1e-8},         {"locality", 1e-8},   {"atom", 1e-9},      {"sharpness", 1e-9},
        {"ft", 1e-8},            {"work_equality", 1e-10},  {"closure", 1e-8},   {"asymptote", 1e-6},
        {"constancy", 1e-8},     {"trace", 1e-8},      {"order", 0.9},      {"lindblad_work", 1e-6},
        {"detailed_balance", 1e-9}, {"mean", 1e-8},    {"rebin", 1e-4},      {"thermal_work", 1e-8},
    };
    return defaults;
}

double RunConfig::tol(const std::string& key) const {
    if (const auto it = tolerances.find(key); it != tolerances.end()) {
        return it->second;
    }
    return default_tolerances().at(key);
}

std::string config_hash(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + file.string());
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
        h ^= static_cast<unsigned char>(*it);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

struct Stop {};

class Walker {
public:
    explicit Walker(bool stop_at_first) : stop_(stop_at_first) {}

    std::vector<Diagnostic> diagnostics;

    void fail(const toml::node* node, std::string path, std::string message) {
        const int line = node != nullptr ? static_cast<int>(node->source().begin.line) : 0;
        diagnostics.push_back({line, std::move(path), std::move(message)});
        if (stop_) {
            throw Stop{};
        }
    }

    // Reports keys of `t` that are not in `allowed`.
    void known_keys(const toml::table& t, const std::string& prefix, std::initializer_list<const char*> allowed) {
        for (const auto& [key, node] : t) {
            const std::string k(key.str());
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
                fail(&node, join(prefix, k), "unknown field");
            }
        }
    }

    static std::string join(const std::string& prefix, const std::string& key) {
        return prefix.empty() ? key : prefix + "." + key;
    }

    const toml::table* table(const toml::table& parent, const std::string& prefix, const char* key, bool required) {
        const toml::node* n = parent.get(key);
        if (n == nullptr) {
            if (required) {
                fail(&parent, join(prefix, key), "missing required table");
            }
            return nullptr;
        }
        if (!n->is_table()) {
            fail(n, join(prefix, key), "expected a table");
            return nullptr;
        }
        return n->as_table();
    }

    std::optional<double> number(const toml::table& parent, const std::string& prefix, const char* key,
                                 bool required) {
        const toml::node* n = parent.get(key);
        if (n == nullptr) {
            if (required) {
                fail(&parent, join(prefix, key), "missing required field");
            }
            return std::nullopt;
        }
        if (!n->is_number()) {
            fail(n, join(prefix, key), "expected a number");
            return std::nullopt;
        }
        const double v = n->value<double>().value_or(std::nan(""));
        if (!std::isfinite(v)) {
            fail(n, join(prefix, key), "must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> positive(const toml::table& parent, const std::string& prefix, const char* key,
                                   bool required, bool allow_zero = false) {
        auto v = number(parent, prefix, key, required);
        if (v && (*v < 0.0 || (!allow_zero && *v == 0.0))) {
            fail(parent.get(key), join(prefix, key),
                 allow_zero ? "invariant violated: must be >= 0" : "invariant violated: must be > 0");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::int64_t> integer(const toml::table& parent, const std::string& prefix, const char* key,
                                        bool required, std::int64_t min) {
        const toml::node* n = parent.get(key);
        if (n == nullptr) {
            if (required) {
                fail(&parent, join(prefix, key), "missing required field");
            }
            return std::nullopt;
        }
        if (!n->is_integer()) {
            fail(n, join(prefix, key), "expected an integer");
            return std::nullopt;
        }
        const std::int64_t v = n->value<std::int64_t>().value_or(0);
        if (v < min) {
            fail(n, join(prefix, key), "invariant violated: must be >= " + std::to_string(min));
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::string> string(const toml::table& parent, const std::string& prefix, const char* key,
                                      bool required) {
        const toml::node* n = parent.get(key);
        if (n == nullptr) {
            if (required) {
                fail(&parent, join(prefix, key), "missing required field");
            }
            return std::nullopt;
        }
        if (!n->is_string()) {
            fail(n, join(prefix, key), "expected a string");
            return std::nullopt;
        }
        return n->value<std::string>();
    }

    std::optional<std::vector<double>> numbers(const toml::table& parent, const std::string& prefix,
                                               const char* key) {
        const toml::node* n = parent.get(key);
        if (n == nullptr) {
            return std::nullopt;
        }
        if (!n->is_array()) {
            fail(n, join(prefix, key), "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& el : *n->as_array()) {
            if (!el.is_number()) {
                fail(&el, join(prefix, key), "expected an array of numbers");
                return std::nullopt;
            }
            out.push_back(el.value<double>().value_or(0.0));
        }
        return out;
    }

    const toml::node* node(const toml::table& parent, const char* key) { return parent.get(key); }

private:
    bool stop_;
};

CouplingSpec parse_coupling(Walker& w, const toml::table& t, const std::string& path,
                            const std::optional<CouplingSpec>& defaults) {
    w.known_keys(t, path, {"jx_c", "jy_c", "site", "tau"});
    CouplingSpec c = defaults.value_or(CouplingSpec{});
    if (auto v = w.number(t, path, "jx_c", false)) {
        c.jx_c = *v;
    }
    if (auto v = w.number(t, path, "jy_c", false)) {
        c.jy_c = *v;
    }
    if (auto v = w.integer(t, path, "site", false, 1)) {
        c.site = static_cast<int>(*v);
    }
    if (auto v = w.positive(t, path, "tau", !defaults.has_value(), true)) {
        c.tau = *v;
    }
    return c;
}

void check_chain(Walker& w, const toml::table& t, const std::string& path, const SpinChainParams& chain) {
    const auto bonds = static_cast<std::size_t>(chain.sites - 1);
    if (chain.jx.size() != bonds) {
        w.fail(w.node(t, "jx") != nullptr ? w.node(t, "jx") : &t, Walker::join(path, "jx"),
               "expected " + std::to_string(bonds) + " entries for " + std::to_string(chain.sites) + " sites");
    }
    if (!chain.jy.empty() && chain.jy.size() != bonds) {
        w.fail(w.node(t, "jy") != nullptr ? w.node(t, "jy") : &t, Walker::join(path, "jy"),
               "expected " + std::to_string(bonds) + " entries for " + std::to_string(chain.sites) + " sites");
    }
}

void check_site(Walker& w, const toml::table& t, const std::string& path, const CouplingSpec& c, int sites) {
    if (c.site > sites) {
        w.fail(w.node(t, "site") != nullptr ? w.node(t, "site") : &t, Walker::join(path, "site"),
               "invariant violated: site " + std::to_string(c.site) + " exceeds " + std::to_string(sites) +
                   " sites");
    }
}

ModelConfig parse_model(Walker& w, const toml::table& t) {
    const std::string path = "model";
    w.known_keys(t, path, {"sites", "h", "jx", "jy", "beta", "bath", "coupling"});
    ModelConfig m;
    if (auto v = w.integer(t, path, "sites", true, 1)) {
        if (*v > 12) {
            w.fail(w.node(t, "sites"), "model.sites", "invariant violated: at most 12 system spins");
        } else {
            m.chain.sites = static_cast<int>(*v);
        }
    }
    m.chain.h = w.number(t, path, "h", true).value_or(0.0);
    m.chain.jx = w.numbers(t, path, "jx").value_or(std::vector<double>{});
    m.chain.jy = w.numbers(t, path, "jy").value_or(std::vector<double>{});
    check_chain(w, t, path, m.chain);
    m.beta = w.positive(t, path, "beta", true).value_or(1.0);
    m.bath_h = m.chain.h;
    if (const toml::table* bath = w.table(t, path, "bath", false)) {
        w.known_keys(*bath, "model.bath", {"h"});
        if (auto v = w.number(*bath, "model.bath", "h", false)) {
            m.bath_h = *v;
        }
    }
    if (const toml::table* c = w.table(t, path, "coupling", false)) {
        m.coupling = parse_coupling(w, *c, "model.coupling", std::nullopt);
        check_site(w, *c, "model.coupling", *m.coupling, m.chain.sites);
    }
    return m;
}

RunConfig parse_run(Walker& w, const toml::table* t) {
    RunConfig r;
    if (t == nullptr) {
        return r;
    }
    w.known_keys(*t, "run", {"repeats", "initial", "out", "budget", "tolerances"});
    if (auto v = w.integer(*t, "run", "repeats", false, 0)) {
        r.repeats = static_cast<int>(*v);
    }
    if (auto v = w.string(*t, "run", "initial", false)) {
        static const std::map<std::string, InitialState> names{{"gibbs", InitialState::Gibbs},
                                                               {"gibbs_h0", InitialState::GibbsH0},
                                                               {"maximally_mixed", InitialState::MaximallyMixed},
                                                               {"random", InitialState::Random}};
        if (const auto it = names.find(*v); it != names.end()) {
            r.initial = it->second;
        } else {
            w.fail(w.node(*t, "initial"), "run.initial",
                   "expected one of gibbs, gibbs_h0, maximally_mixed, random");
        }
    }
    if (auto v = w.string(*t, "run", "out", false)) {
        r.out = *v;
    }
    if (auto v = w.integer(*t, "run", "budget", false, 1)) {
        r.budget = static_cast<std::size_t>(*v);
    }
    if (const toml::table* tol = w.table(*t, "run", "tolerances", false)) {
        for (const auto& [key, node] : *tol) {
            const std::string k(key.str());
            const std::string path = "run.tolerances." + k;
            if (default_tolerances().count(k) == 0) {
                w.fail(&node, path, "unknown tolerance");
                continue;
            }
            if (auto v = w.positive(*tol, "run.tolerances", k.c_str(), true)) {
                r.tolerances[k] = *v;
            }
        }
    }
    return r;
}

std::vector<Variant> parse_variants(Walker& w, const toml::node* n, const ModelConfig& base) {
    if (n == nullptr) {
        return {{"", base}};
    }
    if (!n->is_array_of_tables()) {
        w.fail(n, "variant", "expected an array of tables ([[variant]])");
        return {{"", base}};
    }
    std::vector<Variant> out;
    std::set<std::string> seen;
    std::size_t idx = 0;
    for (const auto& el : *n->as_array()) {
        const toml::table& t = *el.as_table();
        const std::string path = "variant[" + std::to_string(idx++) + "]";
        w.known_keys(t, path, {"name", "h", "jx", "jy", "beta"});
        Variant v{"", base};
        if (auto name = w.string(t, path, "name", true)) {
            const bool valid = !name->empty() && std::all_of(name->begin(), name->end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
            });
            if (!valid) {
                w.fail(w.node(t, "name"), path + ".name", "use letters, digits, '_' or '-'");
            } else if (!seen.insert(*name).second) {
                w.fail(w.node(t, "name"), path + ".name", "duplicate variant name '" + *name + "'");
            }
            v.name = *name;
        }
        if (auto h = w.number(t, path, "h", false)) {
            const bool shared = v.model.bath_h == v.model.chain.h;
            v.model.chain.h = *h;
            if (shared) {
                v.model.bath_h = *h;
            }
        }
        if (auto jx = w.numbers(t, path, "jx")) {
            v.model.chain.jx = *jx;
        }
        if (auto jy = w.numbers(t, path, "jy")) {
            v.model.chain.jy = *jy;
        }
        if (auto beta = w.positive(t, path, "beta", false)) {
            v.model.beta = *beta;
        }
        check_chain(w, t, path, v.model.chain);
        out.push_back(std::move(v));
    }
    if (out.empty()) {
        w.fail(n, "variant", "at least one variant is required when the key is present");
        return {{"", base}};
    }
    return out;
}

std::vector<SequenceEntry> parse_sequence(Walker& w, const toml::node* n, const ModelConfig& model) {
    std::vector<SequenceEntry> out;
    if (!n->is_array()) {
        w.fail(n, "sequence", "expected an array of tables ([[sequence]])");
        return out;
    }
    std::size_t idx = 0;
    for (const auto& el : *n->as_array()) {
        const std::string path = "sequence[" + std::to_string(idx++) + "]";
        if (!el.is_table()) {
            w.fail(&el, path, "expected a table");
            continue;
        }
        const toml::table& t = *el.as_table();
        w.known_keys(t, path, {"repeat", "map"});
        SequenceEntry e;
        if (auto r = w.integer(t, path, "repeat", false, 0)) {
            e.repeat = static_cast<int>(*r);
        }
        if (const toml::table* m = w.table(t, path, "map", !model.coupling.has_value())) {
            e.coupling = parse_coupling(w, *m, path + ".map", model.coupling);
            check_site(w, *m, path + ".map", e.coupling, model.chain.sites);
        } else if (model.coupling) {
            e.coupling = *model.coupling;
        }
        out.push_back(e);
    }
    return out;
}

CycleConfig parse_cycle(Walker& w, const toml::table& t, const ModelConfig& model) {
    w.known_keys(t, "cycle", {"drive", "relax", "relax_steps", "tolerance"});
    CycleConfig c;
    if (const toml::table* d = w.table(t, "cycle", "drive", true)) {
        c.drive = parse_coupling(w, *d, "cycle.drive", std::nullopt);
        check_site(w, *d, "cycle.drive", c.drive, model.chain.sites);
    }
    if (const toml::table* r = w.table(t, "cycle", "relax", true)) {
        c.relax = parse_coupling(w, *r, "cycle.relax", std::nullopt);
        check_site(w, *r, "cycle.relax", c.relax, model.chain.sites);
    }
    if (auto v = w.integer(t, "cycle", "relax_steps", false, 0)) {
        c.relax_steps = static_cast<int>(*v);
    }
    if (auto v = w.positive(t, "cycle", "tolerance", false)) {
        c.tolerance = *v;
    }
    return c;
}

LindbladConfig parse_lindblad(Walker& w, const toml::table* t) {
    LindbladConfig l;
    l.taus = {0.02, 0.01, 0.005};
    if (t == nullptr) {
        return l;
    }
    w.known_keys(*t, "lindblad", {"t", "dt", "sample_every", "convergence_taus", "convergence_t"});
    if (auto v = w.positive(*t, "lindblad", "t", false)) {
        l.t_final = *v;
    }
    if (auto v = w.positive(*t, "lindblad", "dt", false)) {
        l.dt = *v;
    }
    if (auto v = w.integer(*t, "lindblad", "sample_every", false, 1)) {
        l.sample_every = static_cast<int>(*v);
    }
    if (auto v = w.numbers(*t, "lindblad", "convergence_taus")) {
        if (v->empty() || std::any_of(v->begin(), v->end(), [](double x) { return !(x > 0.0); })) {
            w.fail(w.node(*t, "convergence_taus"), "lindblad.convergence_taus",
                   "invariant violated: need a non-empty list of positive values");
        } else {
            l.taus = *v;
        }
    }
    if (auto v = w.positive(*t, "lindblad", "convergence_t", false)) {
        l.convergence_t = *v;
    }
    return l;
}

}  // namespace

ValidationResult validate_scenario(const std::filesystem::path& file, bool stop_at_first) {
    ValidationResult result;
    Walker w(stop_at_first);
    toml::table doc;
    try {
        doc = toml::parse_file(file.string());
    } catch (const toml::parse_error& e) {
        result.diagnostics.push_back(
            {static_cast<int>(e.source().begin.line), "", std::string("parse error: ") + std::string(e.description())});
        return result;
    }

    ScenarioConfig cfg;
    cfg.source = file;
    cfg.name = file.stem().string();
    try {
        cfg.config_hash = config_hash(file);
        w.known_keys(doc, "", {"kind", "name", "seed", "model", "variant", "run", "sequence", "cycle", "lindblad"});
        if (auto kind = w.string(doc, "", "kind", true)) {
            static const std::map<std::string, Kind> kinds{{"single_map", Kind::SingleMap},
                                                           {"sequence", Kind::Sequence},
                                                           {"cycle", Kind::Cycle},
                                                           {"lindblad", Kind::Lindblad},
                                                           {"ft_check", Kind::FtCheck}};
            if (const auto it = kinds.find(*kind); it != kinds.end()) {
                cfg.kind = it->second;
            } else {
                w.fail(w.node(doc, "kind"), "kind",
                       "expected one of single_map, sequence, cycle, lindblad, ft_check");
            }
        }
        if (auto name = w.string(doc, "", "name", false)) {
            cfg.name = *name;
        }
        if (auto seed = w.integer(doc, "", "seed", false, 0)) {
            cfg.seed = static_cast<std::uint64_t>(*seed);
        }

        ModelConfig model;
        if (const toml::table* m = w.table(doc, "", "model", true)) {
            model = parse_model(w, *m);
        }
        cfg.variants = parse_variants(w, w.node(doc, "variant"), model);
        cfg.run = parse_run(w, w.table(doc, "", "run", false));

        const toml::table* model_table = doc.get_as<toml::table>("model");
        const bool needs_coupling = cfg.kind == Kind::SingleMap || cfg.kind == Kind::FtCheck ||
                                    cfg.kind == Kind::Lindblad ||
                                    (cfg.kind == Kind::Sequence && doc.get("sequence") == nullptr);
        if (model_table != nullptr && needs_coupling && !model.coupling) {
            w.fail(model_table, "model.coupling", "missing required table for kind " + to_string(cfg.kind));
        }

        if (const toml::node* seq = w.node(doc, "sequence")) {
            if (cfg.kind != Kind::Sequence) {
                w.fail(seq, "sequence", "only allowed for kind = \"sequence\"");
            } else {
                cfg.sequence = parse_sequence(w, seq, model);
            }
        }
        if (const toml::table* c = w.table(doc, "", "cycle", cfg.kind == Kind::Cycle)) {
            if (cfg.kind != Kind::Cycle) {
                w.fail(c, "cycle", "only allowed for kind = \"cycle\"");
            } else {
                cfg.cycle = parse_cycle(w, *c, model);
            }
        }
        if (const toml::table* l = w.table(doc, "", "lindblad", false); l != nullptr && cfg.kind != Kind::Lindblad) {
            w.fail(l, "lindblad", "only allowed for kind = \"lindblad\"");
        } else if (cfg.kind == Kind::Lindblad) {
            cfg.lindblad = parse_lindblad(w, l);
        }
    } catch (const Stop&) {
    }

    result.diagnostics = std::move(w.diagnostics);
    if (result.diagnostics.empty()) {
        result.config = std::move(cfg);
    }
    return result;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
    ValidationResult r = validate_scenario(file);
    if (!r.ok()) {
        throw SchemaError(std::move(r.diagnostics));
    }
    return std::move(*r.config);
}

}  // namespace qmap::cli
