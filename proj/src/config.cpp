#include "mbloch/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace mbloch {

namespace {

[[noreturn]] void reject(const std::string& path, const std::string& why) {
    throw ConfigError("invalid parameter '" + path + "': " + why);
}

/// Reads keys out of one JSON object and remembers which ones were consumed.
class SectionReader {
public:
    SectionReader(const Json& parent, std::string name) : name_(std::move(name)) {
        const auto it = parent.find(name_);
        if (it == parent.end()) return;
        if (!it->is_object()) reject(name_, "section must be an object");
        obj_ = &*it;
    }
    SectionReader(const Json* obj, std::string name) : obj_(obj), name_(std::move(name)) {
        if (obj_ != nullptr && !obj_->is_object()) reject(name_, "section must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        const Json* v = find(key);
        if (v == nullptr) return;
        if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
            if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
                reject(path(key), "must be a nonnegative integer");
            }
        }
        try {
            out = v->get<T>();
        } catch (const nlohmann::json::exception& e) {
            reject(path(key), std::string("wrong type (") + e.what() + ")");
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        const Json* v = find(key);
        if (v == nullptr || v->is_null()) return;
        T value{};
        get(key, value);
        out = value;
    }

    void get_kind(const char* key, FieldKind& out) {
        std::string name;
        get(key, name);
        if (find(key) != nullptr) {
            try {
                out = field_kind_from_string(name);
            } catch (const ConfigError&) {
                reject(path(key), "expected one of full, reduced, modified");
            }
        }
    }

    [[nodiscard]] const Json* child(const char* key) { return find(key); }

    [[nodiscard]] std::string path(const std::string& key) const { return name_ + "." + key; }

    /// Throws on any key that was not read.
    void finish() const {
        if (obj_ == nullptr) return;
        for (const auto& [key, value] : obj_->items()) {
            if (!seen_.contains(key)) throw ConfigError("unknown key '" + path(key) + "'");
        }
    }

private:
    const Json* find(const char* key) {
        seen_.insert(key);
        if (obj_ == nullptr) return nullptr;
        const auto it = obj_->find(key);
        return it == obj_->end() ? nullptr : &*it;
    }

    const Json* obj_ = nullptr;
    std::string name_;
    std::set<std::string> seen_;
};

InitialSection parse_initial(const Json* obj, const std::string& name) {
    InitialSection init;
    SectionReader r(obj, name);
    r.get("A", init.A);
    r.get("B", init.B);
    r.get("spinors", init.spinors);
    r.get("bloch", init.bloch);
    r.finish();
    if (!init.spinors.empty() && !init.bloch.empty()) reject(name, "give either spinors or bloch, not both");
    return init;
}

Json initial_json(const InitialSection& init) {
    Json j;
    j["A"] = init.A;
    j["B"] = init.B;
    if (!init.spinors.empty()) j["spinors"] = init.spinors;
    if (!init.bloch.empty()) j["bloch"] = init.bloch;
    return j;
}

Method parse_method(const std::string& name) {
    if (name == "rk45") return Method::RK45;
    if (name == "rk4") return Method::RK4;
    reject("integrator.method", "expected rk45 or rk4");
}

void check_count(const std::string& path, std::size_t got, std::size_t N) {
    if (got != N) {
        std::ostringstream os;
        os << "has " << got << " entries but system.N = " << N;
        reject(path, os.str());
    }
}

void validate_newton(const NewtonConfig& n) {
    if (!(n.tol > 0.0)) reject("newton.tol", "must be > 0");
    if (n.max_iter < 1) reject("newton.max_iter", "must be >= 1");
    if (n.max_halvings < 0) reject("newton.max_halvings", "must be >= 0");
    if (!(n.degeneracy > 0.0)) reject("newton.degeneracy", "must be > 0");
    if (!(n.dedup > 0.0)) reject("newton.dedup", "must be > 0");
    if (!(n.marginal >= 0.0)) reject("newton.marginal", "must be >= 0");
}

}  // namespace

RunConfig parse_config(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    static const std::set<std::string> sections = {"system", "pump", "integrator", "modified", "newton", "grid",
                                                   "simulate", "periodic", "sweep", "verify", "rabi", "output"};
    for (const auto& [key, value] : doc.items()) {
        if (!sections.contains(key)) throw ConfigError("unknown section '" + key + "'");
    }

    RunConfig cfg;
    {
        SectionReader r(doc, "system");
        auto& p = cfg.system;
        r.get("Omega", p.Omega);
        r.get("sigma", p.sigma);
        r.get("c", p.c);
        r.get("hbar", p.hbar);
        r.get("omega1", p.omega1);
        r.get("omega2", p.omega2);
        r.get("q", p.q);
        r.get("N", p.N);
        r.get("kappa", p.kappa);
        r.finish();
    }
    {
        SectionReader r(doc, "pump");
        r.get("Omega_p", cfg.pump.Omega_p);
        r.get("offset", cfg.pump.offset);
        r.get("cos", cfg.pump.cos_coeffs);
        r.get("sin", cfg.pump.sin_coeffs);
        r.finish();
    }
    {
        SectionReader r(doc, "integrator");
        auto& i = cfg.integrator;
        std::string method = "rk45";
        r.get("method", method);
        i.method = parse_method(method);
        r.get("step", i.step);
        r.get("abs_tol", i.abs_tol);
        r.get("rel_tol", i.rel_tol);
        r.get("max_step", i.max_step);
        r.get("renormalize", i.renormalize);
        r.get("sample_interval", i.sample_interval);
        r.get("max_steps", i.max_steps);
        r.finish();
    }
    {
        SectionReader r(doc, "modified");
        r.get("R", cfg.modified.R);
        r.get("R_c", cfg.modified.R_c);
        r.get("epsilon", cfg.modified.epsilon);
        r.finish();
    }
    {
        SectionReader r(doc, "newton");
        auto& n = cfg.newton;
        r.get("tol", n.tol);
        r.get("max_iter", n.max_iter);
        r.get("max_halvings", n.max_halvings);
        r.get("degeneracy", n.degeneracy);
        r.get("dedup", n.dedup);
        r.get("marginal", n.marginal);
        r.finish();
    }
    {
        SectionReader r(doc, "grid");
        r.get("radius", cfg.grid.radius);
        r.get("maxwell_count", cfg.grid.maxwell_count);
        r.get("sphere_count", cfg.grid.sphere_count);
        r.finish();
    }
    {
        SectionReader r(doc, "simulate");
        auto& s = cfg.simulate;
        r.get_kind("field", s.field);
        r.get("t0", s.t0);
        r.get("periods", s.periods);
        r.get("t1", s.t1);
        s.initial = parse_initial(r.child("initial"), "simulate.initial");
        r.get("checks", s.checks);
        r.get("norm_tol", s.norm_tol);
        r.finish();
    }
    {
        SectionReader r(doc, "periodic");
        r.get_kind("field", cfg.periodic.field);
        r.finish();
    }
    {
        SectionReader r(doc, "sweep");
        r.get_kind("field", cfg.sweep.field);
        r.get("amplitudes", cfg.sweep.amplitudes);
        if (const Json* start = r.child("start"); start != nullptr && !start->is_null()) {
            cfg.sweep.start = parse_initial(start, "sweep.start");
        }
        r.finish();
    }
    {
        SectionReader r(doc, "verify");
        r.get("criteria", cfg.verify.criteria);
        r.get("seed", cfg.verify.seed);
        r.finish();
    }
    {
        SectionReader r(doc, "rabi");
        r.get("a", cfg.rabi.a);
        r.get("C0", cfg.rabi.C0);
        r.get("t", cfg.rabi.t);
        r.get("tol", cfg.rabi.tol);
        r.finish();
    }
    {
        SectionReader r(doc, "output");
        r.get("dir", cfg.output.dir);
        r.get("workers", cfg.output.workers);
        r.finish();
    }
    return cfg;
}

Json read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void apply_override(Json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' must have the form section.key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    if (key.find('.') == std::string::npos) {
        throw ConfigError("override key '" + key + "' must have the form section.key");
    }

    Json value;
    try {
        value = Json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        value = text;
    }

    Json* node = &doc;
    std::size_t begin = 0;
    while (true) {
        const auto dot = key.find('.', begin);
        const std::string part = key.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
        if (!node->is_object()) {
            if (!node->is_null()) throw ConfigError("override key '" + key + "' descends into a non-object");
            *node = Json::object();
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        begin = dot + 1;
    }
}

ModifiedFieldConfig resolve_modified(const RunConfig& cfg) {
    ModifiedFieldConfig m;
    m.epsilon = cfg.modified.epsilon.value_or(default_epsilon(cfg.system));
    validate_epsilon(cfg.system, m.epsilon);
    m.R = cfg.modified.R.value_or(std::max(bounding_radius(cfg.system, m), 1.0));
    m.R_c = cfg.modified.R_c.value_or(m.R + 2.0);
    validate_modified(cfg.system, m);
    return m;
}

void validate_config(const RunConfig& cfg) {
    validate_params(cfg.system);
    validate_pump(cfg.pump);
    validate_integrator(cfg.integrator);
    validate_newton(cfg.newton);
    if (cfg.grid.radius && !(*cfg.grid.radius >= 0.0)) reject("grid.radius", "must be >= 0");
    if (cfg.grid.maxwell_count < 1) reject("grid.maxwell_count", "must be >= 1");
    if (cfg.grid.sphere_count < 1) reject("grid.sphere_count", "must be >= 1");

    const auto& s = cfg.simulate;
    if (!std::isfinite(s.t0)) reject("simulate.t0", "must be finite");
    if (s.t1) {
        if (!(*s.t1 >= s.t0)) reject("simulate.t1", "must be >= simulate.t0");
    } else if (!(s.periods >= 0.0)) {
        reject("simulate.periods", "must be >= 0");
    }
    for (const auto& c : s.checks) {
        if (c != "norm" && c != "lyapunov" && c != "apriori") {
            reject("simulate.checks", "unknown check '" + c + "' (expected norm, lyapunov, apriori)");
        }
    }
    if (!(s.norm_tol > 0.0)) reject("simulate.norm_tol", "must be > 0");
    if (!s.initial.spinors.empty()) check_count("simulate.initial.spinors", s.initial.spinors.size(), cfg.system.N);
    if (!s.initial.bloch.empty()) check_count("simulate.initial.bloch", s.initial.bloch.size(), cfg.system.N);

    if (cfg.periodic.field == FieldKind::Full) reject("periodic.field", "fixed points need reduced or modified");
    if (cfg.sweep.field == FieldKind::Full) reject("sweep.field", "continuation needs reduced or modified");
    if (cfg.sweep.amplitudes.empty()) reject("sweep.amplitudes", "must not be empty");
    for (double a : cfg.sweep.amplitudes) {
        if (!std::isfinite(a)) reject("sweep.amplitudes", "entries must be finite");
    }
    for (int id : cfg.verify.criteria) {
        if (id < 1 || id > 10) reject("verify.criteria", "ids must be in 1..10");
    }
    if (!std::isfinite(cfg.rabi.a)) reject("rabi.a", "must be finite");
    if (!(cfg.rabi.t >= 0.0)) reject("rabi.t", "must be >= 0");
    if (!(cfg.rabi.tol > 0.0)) reject("rabi.tol", "must be > 0");
    const auto& C = cfg.rabi.C0;
    if (std::abs(C[0] * C[0] + C[1] * C[1] + C[2] * C[2] + C[3] * C[3] - 1.0) > 1e-9) {
        reject("rabi.C0", "must have unit norm");
    }
    if (cfg.output.workers < 1) reject("output.workers", "must be >= 1");
    (void)resolve_modified(cfg);
}

FieldSpec make_field_spec(const RunConfig& cfg, FieldKind kind) {
    FieldSpec spec;
    spec.kind = kind;
    spec.params = cfg.system;
    spec.pump = cfg.pump;
    spec.modified = resolve_modified(cfg);
    return spec;
}

FullState initial_full(const InitialSection& init, std::size_t N) {
    if (!init.bloch.empty()) return hopf_section(initial_reduced(init, N));
    FullState x;
    x.A = init.A;
    x.B = init.B;
    if (init.spinors.empty()) {
        x.C.assign(N, Spinor{Complex{1.0, 0.0}, Complex{0.0, 0.0}});
    } else {
        check_count("initial.spinors", init.spinors.size(), N);
        for (const auto& c : init.spinors) x.C.push_back({Complex{c[0], c[1]}, Complex{c[2], c[3]}});
    }
    validate_state(x);
    return x;
}

ReducedState initial_reduced(const InitialSection& init, std::size_t N) {
    if (!init.spinors.empty()) return hopf_project(initial_full(init, N));
    ReducedState y;
    y.A = init.A;
    y.B = init.B;
    if (init.bloch.empty()) {
        y.s.assign(N, Eigen::Vector3d(0.0, 0.0, -1.0));
    } else {
        check_count("initial.bloch", init.bloch.size(), N);
        for (const auto& b : init.bloch) y.s.emplace_back(b[0], b[1], b[2]);
    }
    validate_state(y);
    return y;
}

Json resolved_config(const RunConfig& cfg) {
    const ModifiedFieldConfig m = resolve_modified(cfg);
    Json doc;

    auto& sys = doc["system"];
    const auto& p = cfg.system;
    sys["Omega"] = p.Omega;
    sys["sigma"] = p.sigma;
    sys["c"] = p.c;
    sys["hbar"] = p.hbar;
    sys["omega1"] = p.omega1;
    sys["omega2"] = p.omega2;
    sys["q"] = p.q;
    sys["N"] = p.N;
    std::vector<double> kappa(p.N);
    for (std::size_t n = 0; n < p.N; ++n) kappa[n] = p.kappa_at(n);
    sys["kappa"] = kappa;

    doc["pump"] = {{"Omega_p", cfg.pump.Omega_p},
                   {"offset", cfg.pump.offset},
                   {"cos", cfg.pump.cos_coeffs},
                   {"sin", cfg.pump.sin_coeffs}};

    const auto& i = cfg.integrator;
    doc["integrator"] = {{"method", i.method == Method::RK45 ? "rk45" : "rk4"},
                         {"step", i.step},
                         {"abs_tol", i.abs_tol},
                         {"rel_tol", i.rel_tol},
                         {"max_step", i.max_step},
                         {"renormalize", i.renormalize},
                         {"sample_interval", i.sample_interval},
                         {"max_steps", i.max_steps}};

    doc["modified"] = {{"R", m.R}, {"R_c", m.R_c}, {"epsilon", m.epsilon}};

    const auto& n = cfg.newton;
    doc["newton"] = {{"tol", n.tol},
                     {"max_iter", n.max_iter},
                     {"max_halvings", n.max_halvings},
                     {"degeneracy", n.degeneracy},
                     {"dedup", n.dedup},
                     {"marginal", n.marginal}};

    doc["grid"] = {{"radius", cfg.grid.radius.value_or(m.R)},
                   {"maxwell_count", cfg.grid.maxwell_count},
                   {"sphere_count", cfg.grid.sphere_count}};

    const auto& s = cfg.simulate;
    auto& sim = doc["simulate"];
    sim["field"] = std::string(to_string(s.field));
    sim["t0"] = s.t0;
    if (s.t1) {
        sim["t1"] = *s.t1;
    } else {
        sim["periods"] = s.periods;
    }
    sim["initial"] = initial_json(s.initial);
    sim["checks"] = s.checks;
    sim["norm_tol"] = s.norm_tol;

    doc["periodic"] = {{"field", std::string(to_string(cfg.periodic.field))}};

    auto& sweep = doc["sweep"];
    sweep["field"] = std::string(to_string(cfg.sweep.field));
    sweep["amplitudes"] = cfg.sweep.amplitudes;
    if (cfg.sweep.start) sweep["start"] = initial_json(*cfg.sweep.start);

    doc["verify"] = {{"criteria", cfg.verify.criteria}, {"seed", cfg.verify.seed}};
    doc["rabi"] = {{"a", cfg.rabi.a}, {"C0", cfg.rabi.C0}, {"t", cfg.rabi.t}, {"tol", cfg.rabi.tol}};
    return doc;
}

}  // namespace mbloch
