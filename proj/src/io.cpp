#include "pcurv/io.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "pcurv/digest.hpp"

namespace pcurv {

namespace fs = std::filesystem;

// ---- strict JSON helpers -----------------------------------------------------

namespace {

void require_keys(const json& obj, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional, const std::string& where) {
    if (!obj.is_object()) throw parse_error(where + ": expected an object");
    for (const auto& k : required)
        if (!obj.contains(k)) throw parse_error(where + ": missing field '" + k + "'");
    for (const auto& [k, v] : obj.items()) {
        bool known = false;
        for (const auto& r : required)
            if (k == r) known = true;
        for (const auto& o : optional)
            if (k == o) known = true;
        if (!known) throw parse_error(where + ": unknown field '" + k + "'");
    }
}

long get_long(const json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw parse_error(where + ": field '" + key + "' must be an integer");
    return v.get<long>();
}

mpz_class get_mpz(const json& v, const std::string& where) {
    if (v.is_number_integer()) return mpz_class(static_cast<long>(v.get<long long>()));
    if (v.is_string()) {
        try {
            return mpz_class(v.get<std::string>());
        } catch (const std::invalid_argument&) {
            throw parse_error(where + ": malformed integer literal");
        }
    }
    throw parse_error(where + ": integers must be JSON integers or decimal strings");
}

Rat term_coefficient(const json& term, const std::string& where) {
    mpz_class num = get_mpz(term.at("num"), where);
    mpz_class den = get_mpz(term.at("den"), where);
    if (den == 0) throw parse_error(where + ": zero denominator");
    Rat r(mpq_class(num) / mpq_class(den));
    r.canonicalize();
    return r;
}

std::string mpz_str(const mpz_class& z) { return z.get_str(); }

}  // namespace

std::string canonical_dump(const json& j) { return j.dump(2); }

// ---- operator parse/serialize --------------------------------------------------

OperatorDoc parse_operator(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("operator file is not valid JSON: ") + e.what());
    }
    require_keys(j, {"format_version", "kind", "name", "ring", "derivation", "rank", "matrix"},
                 {"description", "oracle", "ram_t", "ram_q", "q_trunc"}, "operator");
    if (get_long(j, "format_version", "operator") != 1)
        throw schema_version_error("unsupported operator format_version");
    if (j.at("kind").get<std::string>() != "operator")
        throw parse_error("operator: kind must be 'operator'");

    OperatorDoc doc;
    doc.name = j.at("name").get<std::string>();
    if (j.contains("description")) doc.description = j.at("description").get<std::string>();
    if (j.contains("oracle")) doc.oracle = j.at("oracle").get<std::string>();

    std::string ring = j.at("ring").get<std::string>();
    std::string der_s = j.at("derivation").get<std::string>();
    Derivation der;
    if (der_s == "t_ddt")
        der = Derivation::t_ddt;
    else if (der_s == "ddt")
        der = Derivation::ddt;
    else
        throw parse_error("operator: derivation must be 't_ddt' or 'ddt'");

    int rank = static_cast<int>(get_long(j, "rank", "operator"));
    if (rank < 1) throw parse_error("operator: rank must be positive");
    long ram_t = j.contains("ram_t") ? get_long(j, "ram_t", "operator") : 1;
    if (ram_t < 1) throw parse_error("operator: ram_t must be positive");

    const json& m = j.at("matrix");
    if (!m.is_array() || static_cast<int>(m.size()) != rank)
        throw parse_error("operator: matrix must have 'rank' rows");

    if (ring == "rational_laurent_t") {
        if (j.contains("ram_q") || j.contains("q_trunc"))
            throw parse_error("operator: q fields are only valid for biseries_qt");
        Connection<LaurentQ> c;
        c.n = rank;
        c.der = der;
        c.ram_t = ram_t;
        c.a = Matrix<LaurentQ>(rank, rank, lp_zero<Rat>(ram_t));
        for (int r = 0; r < rank; ++r) {
            const json& row = m.at(r);
            if (!row.is_array() || static_cast<int>(row.size()) != rank)
                throw parse_error("operator: matrix row has wrong length");
            for (int s = 0; s < rank; ++s) {
                LaurentQ entry = lp_zero<Rat>(ram_t);
                for (const auto& term : row.at(s)) {
                    std::string where = "operator entry (" + std::to_string(r) + "," +
                                        std::to_string(s) + ")";
                    require_keys(term, {"t_pow", "num", "den"}, {}, where);
                    long tp = get_long(term, "t_pow", where);
                    entry = entry + lp_monomial(term_coefficient(term, where), tp, ram_t);
                }
                c.a.at(r, s) = entry;
            }
        }
        // companion detection fixes the basis tag
        bool companion = true;
        for (int r = 0; r < rank && companion; ++r)
            for (int s = 0; s < rank && companion; ++s) {
                if (s == rank - 1) continue;
                const LaurentQ& e = c.a.at(r, s);
                if (r == s + 1) {
                    if (!(e == lp_const(Rat(1), ram_t))) companion = false;
                } else if (!e.is_zero()) {
                    companion = false;
                }
            }
        c.basis = (companion && rank >= 1) ? BasisTag::cyclic : BasisTag::general;
        doc.ring = RingTag::rational_laurent_t;
        doc.laurent = std::move(c);
        return doc;
    }
    if (ring != "biseries_qt") throw parse_error("operator: unknown ring tag '" + ring + "'");

    long ram_q = j.contains("ram_q") ? get_long(j, "ram_q", "operator") : 1;
    if (ram_q < 1) throw parse_error("operator: ram_q must be positive");
    long trunc = kExactOrder;
    if (j.contains("q_trunc")) {
        trunc = get_long(j, "q_trunc", "operator");
        if (trunc < 1) throw parse_error("operator: q_trunc must be positive");
    }
    Connection<BiQ> c;
    c.n = rank;
    c.der = der;
    c.ram_t = ram_t;
    c.ram_q = ram_q;
    c.trunc = trunc;
    c.a = Matrix<BiQ>(rank, rank, bs_zero<Rat>(trunc, ram_q, ram_t));
    for (int r = 0; r < rank; ++r) {
        const json& row = m.at(r);
        if (!row.is_array() || static_cast<int>(row.size()) != rank)
            throw parse_error("operator: matrix row has wrong length");
        for (int s = 0; s < rank; ++s) {
            BiQ entry = bs_zero<Rat>(trunc, ram_q, ram_t);
            for (const auto& term : row.at(s)) {
                std::string where =
                    "operator entry (" + std::to_string(r) + "," + std::to_string(s) + ")";
                require_keys(term, {"t_pow", "q_pow", "num", "den"}, {}, where);
                long tp = get_long(term, "t_pow", where);
                long qp = get_long(term, "q_pow", where);
                entry = entry + bs_monomial(term_coefficient(term, where), tp, qp, trunc, ram_q,
                                            ram_t);
            }
            c.a.at(r, s) = entry;
        }
    }
    bool companion = true;
    for (int r = 0; r < rank && companion; ++r)
        for (int s = 0; s < rank && companion; ++s) {
            if (s == rank - 1) continue;
            const BiQ& e = c.a.at(r, s);
            if (r == s + 1) {
                if (!same_series(e, bs_const(Rat(1), e.trunc, ram_q, ram_t))) companion = false;
            } else if (!e.is_zero()) {
                companion = false;
            }
        }
    c.basis = companion ? BasisTag::cyclic : BasisTag::general;
    doc.ring = RingTag::biseries_qt;
    doc.biseries = std::move(c);
    return doc;
}

OperatorDoc load_operator(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open operator file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_operator(ss.str());
    } catch (const parse_error&) {
        throw;
    }
}

json operator_to_json(const Connection<LaurentQ>& c, const std::string& name,
                      const std::string& description, const std::string& oracle) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "operator";
    j["name"] = name;
    if (!description.empty()) j["description"] = description;
    if (!oracle.empty()) j["oracle"] = oracle;
    j["ring"] = "rational_laurent_t";
    j["derivation"] = c.der == Derivation::t_ddt ? "t_ddt" : "ddt";
    j["rank"] = c.n;
    j["ram_t"] = c.ram_t;
    json m = json::array();
    for (int r = 0; r < c.n; ++r) {
        json row = json::array();
        for (int s = 0; s < c.n; ++s) {
            json terms = json::array();
            LaurentQ e = rescale_ram_t(c.a.at(r, s), c.ram_t / c.a.at(r, s).ram_t);
            for (const auto& [tp, v] : e.terms) {
                json term;
                term["t_pow"] = tp;
                term["num"] = mpz_str(v.get_num());
                term["den"] = mpz_str(v.get_den());
                terms.push_back(term);
            }
            row.push_back(terms);
        }
        m.push_back(row);
    }
    j["matrix"] = m;
    return j;
}

json operator_to_json(const Connection<BiQ>& c, const std::string& name,
                      const std::string& description, const std::string& oracle) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "operator";
    j["name"] = name;
    if (!description.empty()) j["description"] = description;
    if (!oracle.empty()) j["oracle"] = oracle;
    j["ring"] = "biseries_qt";
    j["derivation"] = c.der == Derivation::t_ddt ? "t_ddt" : "ddt";
    j["rank"] = c.n;
    j["ram_t"] = c.ram_t;
    j["ram_q"] = c.ram_q;
    if (c.trunc < kExactOrder) j["q_trunc"] = c.trunc;
    json m = json::array();
    for (int r = 0; r < c.n; ++r) {
        json row = json::array();
        for (int s = 0; s < c.n; ++s) {
            json terms = json::array();
            BiQ e = c.a.at(r, s);
            e = rescale_ram_t(e, c.ram_t / e.ram_t);
            e = rescale_ram_q(e, c.ram_q / e.ram_q);
            for (const auto& [tp, qs] : e.terms) {
                for (size_t i = 0; i < qs.c.size(); ++i) {
                    if (is_zero(qs.c[i])) continue;
                    json term;
                    term["t_pow"] = tp;
                    term["q_pow"] = qs.lo + static_cast<long>(i);
                    term["num"] = mpz_str(qs.c[i].get_num());
                    term["den"] = mpz_str(qs.c[i].get_den());
                    terms.push_back(term);
                }
            }
            row.push_back(terms);
        }
        m.push_back(row);
    }
    j["matrix"] = m;
    return j;
}

json operator_to_json(const OperatorDoc& doc) {
    if (doc.ring == RingTag::rational_laurent_t)
        return operator_to_json(*doc.laurent, doc.name, doc.description, doc.oracle);
    return operator_to_json(*doc.biseries, doc.name, doc.description, doc.oracle);
}

// ---- scenarios -----------------------------------------------------------------

ScenarioDoc parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("scenario file is not valid JSON: ") + e.what());
    }
    require_keys(j, {"format_version", "kind", "name", "operator", "command"},
                 {"check", "reduce", "monodromy"}, "scenario");
    if (get_long(j, "format_version", "scenario") != 1)
        throw schema_version_error("unsupported scenario format_version");
    if (j.at("kind").get<std::string>() != "scenario")
        throw parse_error("scenario: kind must be 'scenario'");
    ScenarioDoc s;
    s.name = j.at("name").get<std::string>();
    s.operator_path = j.at("operator").get<std::string>();
    s.command = j.at("command").get<std::string>();
    if (s.command != "check" && s.command != "reduce" && s.command != "monodromy")
        throw parse_error("scenario: command must be check, reduce or monodromy");

    if (j.contains("check")) {
        require_keys(j.at("check"), {"primes_max"}, {}, "scenario.check");
        s.check.primes_max = get_long(j.at("check"), "primes_max", "scenario.check");
        if (s.check.primes_max < 2) throw parse_error("scenario: primes_max must be >= 2");
    }
    if (j.contains("reduce")) {
        require_keys(j.at("reduce"), {"q_order"}, {"check_primes"}, "scenario.reduce");
        s.reduce.q_order = get_long(j.at("reduce"), "q_order", "scenario.reduce");
        if (s.reduce.q_order < 1) throw parse_error("scenario: q_order must be >= 1");
        if (j.at("reduce").contains("check_primes")) {
            s.reduce.check_primes.clear();
            for (const auto& p : j.at("reduce").at("check_primes")) {
                long long pv = p.get<long long>();
                if (pv < 2) throw parse_error("scenario: check primes must be >= 2");
                s.reduce.check_primes.push_back(pv);
            }
        }
    }
    if (j.contains("monodromy")) {
        const json& mj = j.at("monodromy");
        require_keys(mj, {},
                     {"loop", "k_max", "tolerance", "step_fraction", "mode", "q_samples",
                      "operator2", "congruence_order", "slope_tolerance"},
                     "scenario.monodromy");
        MonodromyParams& mp = s.monodromy;
        if (mj.contains("loop")) {
            const json& lj = mj.at("loop");
            require_keys(lj, {}, {"center", "radius", "samples", "counterclockwise", "clearance"},
                         "scenario.monodromy.loop");
            if (lj.contains("center")) {
                const auto& cj = lj.at("center");
                if (!cj.is_array() || cj.size() != 2)
                    throw parse_error("scenario: loop center must be [re, im]");
                mp.loop.center = cx(cj.at(0).get<double>(), cj.at(1).get<double>());
            }
            if (lj.contains("radius")) mp.loop.radius = lj.at("radius").get<double>();
            if (mp.loop.radius <= 0) throw parse_error("scenario: loop radius must be positive");
            if (lj.contains("samples")) mp.loop.samples = lj.at("samples").get<int>();
            if (lj.contains("counterclockwise"))
                mp.loop.counterclockwise = lj.at("counterclockwise").get<bool>();
            if (lj.contains("clearance")) mp.loop.clearance = lj.at("clearance").get<double>();
            if (mp.loop.clearance <= 0) throw parse_error("scenario: clearance must be positive");
        }
        if (mj.contains("k_max")) mp.k_max = mj.at("k_max").get<long>();
        if (mj.contains("tolerance")) mp.tolerance = mj.at("tolerance").get<double>();
        if (mp.tolerance <= 0) throw parse_error("scenario: tolerance must be positive");
        if (mj.contains("step_fraction")) mp.step_fraction = mj.at("step_fraction").get<double>();
        if (mp.step_fraction <= 0 || mp.step_fraction >= 1)
            throw parse_error("scenario: step_fraction must be in (0, 1)");
        if (mj.contains("mode")) {
            std::string mode = mj.at("mode").get<std::string>();
            if (mode == "single")
                mp.mode = MonodromyMode::single;
            else if (mode == "congruence")
                mp.mode = MonodromyMode::congruence;
            else if (mode == "order_propagation")
                mp.mode = MonodromyMode::order_propagation;
            else
                throw parse_error("scenario: unknown monodromy mode '" + mode + "'");
        }
        if (mj.contains("q_samples"))
            for (const auto& q : mj.at("q_samples")) {
                double qv = q.get<double>();
                if (qv <= 0 || qv >= 1) throw parse_error("scenario: q samples must be in (0,1)");
                mp.q_samples.push_back(qv);
            }
        if (mj.contains("operator2")) mp.operator2 = mj.at("operator2").get<std::string>();
        if (mj.contains("congruence_order"))
            mp.congruence_order = mj.at("congruence_order").get<long>();
        if (mj.contains("slope_tolerance"))
            mp.slope_tolerance = mj.at("slope_tolerance").get<double>();
        if (mp.slope_tolerance <= 0) throw parse_error("scenario: slope_tolerance must be positive");
        if (mp.mode == MonodromyMode::congruence && mp.operator2.empty())
            throw parse_error("scenario: congruence mode needs operator2");
        if (mp.mode != MonodromyMode::single && mp.q_samples.empty())
            throw parse_error("scenario: family modes need q_samples");
    }
    return s;
}

ScenarioDoc load_scenario(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ScenarioDoc s = parse_scenario(ss.str());
    s.base_dir = path.parent_path();
    return s;
}

json scenario_to_json(const ScenarioDoc& s) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "scenario";
    j["name"] = s.name;
    j["operator"] = s.operator_path;
    j["command"] = s.command;
    if (s.command == "check") j["check"] = {{"primes_max", s.check.primes_max}};
    if (s.command == "reduce")
        j["reduce"] = {{"q_order", s.reduce.q_order}, {"check_primes", s.reduce.check_primes}};
    if (s.command == "monodromy") {
        const MonodromyParams& mp = s.monodromy;
        json mj;
        mj["loop"] = {{"center", {mp.loop.center.real(), mp.loop.center.imag()}},
                      {"radius", mp.loop.radius},
                      {"samples", mp.loop.samples},
                      {"counterclockwise", mp.loop.counterclockwise},
                      {"clearance", mp.loop.clearance}};
        mj["k_max"] = mp.k_max;
        mj["tolerance"] = mp.tolerance;
        mj["step_fraction"] = mp.step_fraction;
        mj["mode"] = mp.mode == MonodromyMode::single
                         ? "single"
                         : (mp.mode == MonodromyMode::congruence ? "congruence"
                                                                 : "order_propagation");
        if (!mp.q_samples.empty()) mj["q_samples"] = mp.q_samples;
        if (!mp.operator2.empty()) mj["operator2"] = mp.operator2;
        if (mp.mode == MonodromyMode::congruence) {
            mj["congruence_order"] = mp.congruence_order;
            mj["slope_tolerance"] = mp.slope_tolerance;
        }
        j["monodromy"] = mj;
    }
    return j;
}

// ---- result records and the cache ----------------------------------------------

std::string content_hash(const std::string& toolkit_version, const std::string& command,
                         const json& operator_json, const json& params_json) {
    std::string blob = toolkit_version + "\x1f" + command + "\x1f" + canonical_dump(operator_json) +
                       "\x1f" + canonical_dump(params_json);
    return fnv1a_hex(blob);
}

static std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::optional<ResultRecord> cache_lookup(const CacheConfig& cfg, const std::string& hash) {
    if (!cfg.enabled) return std::nullopt;
    fs::path file = cfg.dir / (hash + ".json");
    if (!fs::exists(file)) return std::nullopt;
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
        ResultRecord rec;
        rec.content_hash = j.at("content_hash").get<std::string>();
        rec.toolkit_version = j.at("toolkit_version").get<std::string>();
        rec.command = j.at("command").get<std::string>();
        rec.operator_name = j.at("operator").get<std::string>();
        rec.scenario_name = j.at("scenario").get<std::string>();
        rec.payload = j.at("payload");
        rec.exit_code = j.at("exit_code").get<int>();
        rec.created_at = j.at("created_at").get<std::string>();
        if (rec.content_hash != hash)
            throw cache_corrupt("cache record " + file.string() + " does not match its key");
        return rec;
    } catch (const json::exception&) {
        throw cache_corrupt("cache record " + file.string() + " is unreadable");
    }
}

void cache_store(const CacheConfig& cfg, const ResultRecord& rec) {
    if (!cfg.enabled) return;
    fs::create_directories(cfg.dir);
    json j;
    j["content_hash"] = rec.content_hash;
    j["toolkit_version"] = rec.toolkit_version;
    j["command"] = rec.command;
    j["operator"] = rec.operator_name;
    j["scenario"] = rec.scenario_name;
    j["payload"] = rec.payload;
    j["exit_code"] = rec.exit_code;
    j["created_at"] = rec.created_at.empty() ? now_iso8601() : rec.created_at;
    fs::path file = cfg.dir / (rec.content_hash + ".json");
    fs::path tmp = cfg.dir / (rec.content_hash + ".tmp");
    {
        std::ofstream out(tmp);
        out << canonical_dump(j) << "\n";
    }
    fs::rename(tmp, file);
}

std::string render_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", x);
    return buf;
}

// ---- corpus builders -------------------------------------------------------------

Connection<BiQ> hypergeometric_companion(const Rat& a, const Rat& b, const Rat& c, long q_trunc) {
    // geometric series 1/(1 - qt) truncated at q^q_trunc
    BiQ geom = bs_zero<Rat>(q_trunc);
    for (long k = 0; k < q_trunc; ++k) geom = geom + bs_monomial(Rat(1), k, k, q_trunc);
    BiQ x = bs_monomial(Rat(1), 1, 1, q_trunc);  // qt
    Rat cm1 = c - Rat(1);
    Rat apb = a + b;
    Rat ab = a * b;
    BiQ p = (bs_const(cm1, q_trunc) - x * apb) * geom;
    BiQ qq = -(x * ab) * geom;
    BiQ f1 = p;
    BiQ f0 = derivation_D(p) - qq;
    return companion_from_operator<BiQ>({f0, f1}, Derivation::t_ddt);
}

std::vector<Rat> hypergeometric_coefficients(const Rat& a, const Rat& b, const Rat& c, long count) {
    std::vector<Rat> u(count);
    u[0] = Rat(1);
    for (long k = 0; k + 1 < count; ++k) {
        Rat num = (a + Rat(k)) * (b + Rat(k));
        Rat den = (c + Rat(k)) * Rat(k + 1);
        u[k + 1] = u[k] * num / den;
    }
    return u;
}

std::vector<BiQ> companion_flat_vector(const Connection<BiQ>& conn, const BiQ& u) {
    if (conn.n != 2) throw std::invalid_argument("flat vector helper is rank-2 only");
    const BiQ& f1 = conn.a.at(1, 1);
    BiQ x0 = -(derivation_D(u)) - f1 * u;
    return {x0, u};
}

}  // namespace pcurv
