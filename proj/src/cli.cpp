#include "pcurv/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pcurv/gauge.hpp"
#include "pcurv/io.hpp"
#include "pcurv/monodromy.hpp"
#include "pcurv/pcurvature.hpp"

namespace pcurv {

namespace fs = std::filesystem;

namespace {

constexpr int kExitPositive = 0;
constexpr int kExitNegative = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumeric = 4;

struct EmitConfig {
    std::string format = "json";  // json | text
};

json loop_to_json(const LoopSpec& l) {
    return json{{"center", {l.center.real(), l.center.imag()}},
                {"radius", l.radius},
                {"samples", l.samples},
                {"counterclockwise", l.counterclockwise},
                {"clearance", l.clearance}};
}

json matrix_to_json(const MatC& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols; ++c)
            row.push_back({render_double(m.at(r, c).real()), render_double(m.at(r, c).imag())});
        rows.push_back(row);
    }
    return rows;
}

// ---- payload builders, one per command --------------------------------------

std::pair<json, int> run_check(const OperatorDoc& doc, const CheckParams& params) {
    SweepSummary s = doc.ring == RingTag::rational_laurent_t
                         ? sweep_primes(*doc.laurent, params.primes_max)
                         : sweep_primes(*doc.biseries, params.primes_max);
    json payload;
    payload["p_max"] = s.p_max;
    payload["vanishing"] = s.vanishing;
    payload["nonzero"] = s.nonzero;
    payload["bad"] = s.bad;
    payload["exceptional_primes"] = s.exceptional_primes;
    json reports = json::array();
    for (const auto& r : s.reports) {
        json jr;
        jr["p"] = r.p;
        jr["status"] = r.status == PCurvatureStatus::vanishes
                           ? "vanishes"
                           : (r.status == PCurvatureStatus::nonzero ? "nonzero" : "bad_prime");
        if (r.status == PCurvatureStatus::nonzero) jr["witness"] = r.witness;
        if (r.status == PCurvatureStatus::bad) jr["reason"] = r.bad_reason;
        if (r.trunc < kExactOrder) jr["q_trunc"] = r.trunc;
        reports.push_back(jr);
    }
    payload["reports"] = reports;
    payload["verdict"] = s.nonzero == 0 ? "all_vanish" : "nonzero_found";
    return {payload, s.nonzero == 0 ? kExitPositive : kExitNegative};
}

std::pair<json, int> run_reduce(const OperatorDoc& doc, const ReduceParams& params) {
    const Connection<BiQ>& conn = doc.as_biseries();
    ReduceCertificate cert = run_reduction_pipeline(conn, params.q_order, params.check_primes);
    json payload;
    payload["verdict"] = cert.positive ? "positive" : "negative";
    if (!cert.positive) {
        payload["kind"] = cert.negative_kind;
        payload["detail"] = cert.detail;
    }
    payload["q_order"] = cert.order_m;
    payload["pullback_m"] = cert.pullback_m;
    payload["alpha_interval"] = {cert.alpha_interval.first, cert.alpha_interval.second};
    if (cert.positive) {
        payload["gauge_q_integral"] = cert.gauge_q_integral;
        payload["gauge_digest"] = cert.gauge_digest;
        payload["stages"] = cert.stage_labels;
    }
    return {payload, cert.positive ? kExitPositive : kExitNegative};
}

json monodromy_result_to_json(const MonodromyResult& res) {
    json jr;
    jr["matrix"] = matrix_to_json(res.m);
    jr["residual"] = render_double(res.residual);
    if (res.order)
        jr["order"] = *res.order;
    else
        jr["order"] = nullptr;
    jr["order_tolerance"] = render_double(res.order_tolerance);
    json eig = json::array();
    for (const auto& e : res.eigen) {
        eig.push_back({{"re", render_double(e.lambda.real())},
                       {"im", render_double(e.lambda.imag())},
                       {"abs_deviation", render_double(e.abs_deviation)},
                       {"angle", std::to_string(e.angle_num) + "/" + std::to_string(e.angle_den)},
                       {"angle_error", render_double(e.angle_error)}});
    }
    jr["eigenvalues"] = eig;
    return jr;
}

std::pair<json, int> run_monodromy(const OperatorDoc& doc, const MonodromyParams& params,
                                   const fs::path& base_dir) {
    ContinuationOptions opt;
    opt.step_fraction = params.step_fraction;
    json payload;
    payload["loop"] = loop_to_json(params.loop);
    try {
        if (params.mode == MonodromyMode::single) {
            NumericConnection nc;
            if (doc.ring == RingTag::rational_laurent_t) {
                nc = specialize(*doc.laurent);
            } else {
                if (params.q_samples.empty())
                    throw parse_error("bi-series operator needs q_samples for single monodromy");
                nc = specialize(*doc.biseries, cx(params.q_samples.front(), 0.0));
                payload["q"] = render_double(params.q_samples.front());
            }
            MonodromyResult res =
                monodromy_of_annulus(nc, params.loop, params.k_max, params.tolerance, opt);
            payload["mode"] = "single";
            payload["result"] = monodromy_result_to_json(res);
            return {payload, kExitPositive};
        }
        if (params.mode == MonodromyMode::congruence) {
            OperatorDoc doc2 = load_operator(base_dir / params.operator2);
            CongruenceReport rep = family_congruence_check(
                doc.as_biseries(), doc2.as_biseries(), params.q_samples, params.congruence_order,
                params.slope_tolerance, params.loop, opt);
            payload["mode"] = "congruence";
            payload["congruence_order"] = rep.order_m;
            payload["symbolic_ok"] = rep.symbolic_ok;
            json samples = json::array();
            for (const auto& s : rep.samples)
                samples.push_back({{"q", render_double(s.q)}, {"delta", render_double(s.delta)}});
            payload["samples"] = samples;
            payload["all_tiny"] = rep.all_tiny;
            payload["slope"] = rep.all_tiny ? json("inf") : json(render_double(rep.slope));
            payload["slope_ok"] = rep.slope_ok;
            bool ok = rep.symbolic_ok && rep.slope_ok;
            payload["verdict"] = ok ? "congruent" : "congruence_failed";
            return {payload, ok ? kExitPositive : kExitNegative};
        }
        // order propagation
        PropagationReport rep =
            order_propagation_check(doc.as_biseries(), params.q_samples, params.k_max,
                                    params.tolerance, params.loop, opt);
        payload["mode"] = "order_propagation";
        payload["status"] = rep.status == PropagationStatus::consistent
                                ? "consistent"
                                : (rep.status == PropagationStatus::order_jump
                                       ? "order_jump"
                                       : "no_order_detected");
        if (rep.order)
            payload["order"] = *rep.order;
        else
            payload["order"] = nullptr;
        json samples = json::array();
        for (const auto& s : rep.samples) {
            json js;
            js["q"] = render_double(s.q);
            if (s.order)
                js["order"] = *s.order;
            else
                js["order"] = nullptr;
            js["residual"] = render_double(s.residual);
            samples.push_back(js);
        }
        payload["samples"] = samples;
        json wit = json::array();
        for (double w : rep.witnesses) wit.push_back(render_double(w));
        payload["witnesses"] = wit;
        return {payload, rep.status == PropagationStatus::consistent ? kExitPositive
                                                                     : kExitNegative};
    } catch (const singularity_too_close& e) {
        payload["error"] = std::string("singularity_too_close: ") + e.what();
        return {payload, kExitNumeric};
    } catch (const no_convergence& e) {
        payload["error"] = std::string("no_convergence: ") + e.what();
        return {payload, kExitNumeric};
    }
}

void emit_record(const ResultRecord& rec, const EmitConfig& emit, bool cache_hit) {
    if (emit.format == "json") {
        json j;
        j["content_hash"] = rec.content_hash;
        j["toolkit_version"] = rec.toolkit_version;
        j["command"] = rec.command;
        j["operator"] = rec.operator_name;
        j["scenario"] = rec.scenario_name;
        j["payload"] = rec.payload;
        j["exit_code"] = rec.exit_code;
        j["cache_hit"] = cache_hit;
        std::cout << canonical_dump(j) << "\n";
        return;
    }
    std::cout << rec.command << " " << rec.operator_name;
    if (!rec.scenario_name.empty()) std::cout << " [" << rec.scenario_name << "]";
    std::cout << (cache_hit ? " (cached)" : "") << "\n";
    if (rec.command == "check") {
        std::cout << "  p <= " << rec.payload.at("p_max") << ": " << rec.payload.at("vanishing")
                  << " vanish, " << rec.payload.at("nonzero") << " nonzero, "
                  << rec.payload.at("bad") << " bad" << "\n";
        std::cout << "  verdict: " << rec.payload.at("verdict").get<std::string>() << "\n";
    } else if (rec.command == "reduce") {
        std::cout << "  verdict: " << rec.payload.at("verdict").get<std::string>();
        if (rec.payload.contains("kind"))
            std::cout << " (" << rec.payload.at("kind").get<std::string>() << ")";
        std::cout << " at q-order " << rec.payload.at("q_order") << "\n";
    } else {
        std::cout << "  " << canonical_dump(rec.payload) << "\n";
    }
    std::cout << "  exit " << rec.exit_code << "\n";
}

// assemble, consult the cache, compute, persist
int execute_scenario(const ScenarioDoc& scenario, const CacheConfig& cache,
                     const EmitConfig& emit) {
    OperatorDoc doc = load_operator(scenario.base_dir / scenario.operator_path);
    json op_json = operator_to_json(doc);
    json params_json = scenario_to_json(scenario);
    std::string hash = content_hash(kToolkitVersion, scenario.command, op_json, params_json);

    try {
        if (auto hit = cache_lookup(cache, hash)) {
            emit_record(*hit, emit, true);
            return hit->exit_code;
        }
    } catch (const cache_corrupt& e) {
        std::cerr << "warning: " << e.what() << "; recomputing\n";
    }

    std::pair<json, int> out;
    if (scenario.command == "check")
        out = run_check(doc, scenario.check);
    else if (scenario.command == "reduce")
        out = run_reduce(doc, scenario.reduce);
    else
        out = run_monodromy(doc, scenario.monodromy, scenario.base_dir);

    ResultRecord rec;
    rec.content_hash = hash;
    rec.command = scenario.command;
    rec.operator_name = doc.name;
    rec.scenario_name = scenario.name;
    rec.payload = out.first;
    rec.exit_code = out.second;
    cache_store(cache, rec);
    emit_record(rec, emit, false);
    return rec.exit_code;
}

ScenarioDoc scenario_for_file(const fs::path& input, const std::string& command) {
    std::ifstream in(input);
    if (!in) throw parse_error("cannot open " + input.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw parse_error(input.string() + " is not valid JSON: " + e.what());
    }
    std::string kind = j.value("kind", "");
    if (kind == "scenario") {
        ScenarioDoc s = load_scenario(input);
        if (s.command != command)
            throw parse_error("scenario " + s.name + " is for command '" + s.command + "'");
        return s;
    }
    if (kind != "operator") throw parse_error(input.string() + ": unknown document kind");
    ScenarioDoc s;
    s.name = "";
    s.command = command;
    s.operator_path = input.filename().string();
    s.base_dir = input.parent_path();
    return s;
}

int run_corpus_verify(const fs::path& corpus_dir, const fs::path& golden_dir, bool update,
                      const EmitConfig&) {
    std::vector<fs::path> scenarios;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
        auto name = entry.path().filename().string();
        if (name.size() > 14 && name.substr(name.size() - 14) == ".scenario.json")
            scenarios.push_back(entry.path());
    }
    std::sort(scenarios.begin(), scenarios.end());
    if (scenarios.empty()) {
        std::cerr << "no scenarios found in " << corpus_dir << "\n";
        return kExitInput;
    }
    bool all_ok = true;
    for (const auto& path : scenarios) {
        ScenarioDoc scenario = load_scenario(path);
        OperatorDoc doc = load_operator(scenario.base_dir / scenario.operator_path);
        std::pair<json, int> out;
        if (scenario.command == "check")
            out = run_check(doc, scenario.check);
        else if (scenario.command == "reduce")
            out = run_reduce(doc, scenario.reduce);
        else
            out = run_monodromy(doc, scenario.monodromy, scenario.base_dir);
        json golden;
        golden["scenario"] = scenario.name;
        golden["command"] = scenario.command;
        golden["operator"] = doc.name;
        golden["exit_code"] = out.second;
        golden["payload"] = out.first;
        std::string dumped = canonical_dump(golden) + "\n";
        fs::path gfile = golden_dir / (scenario.name + ".golden.json");
        if (update) {
            fs::create_directories(golden_dir);
            std::ofstream o(gfile);
            o << dumped;
            std::cout << "[UPDATED] " << scenario.name << "\n";
            continue;
        }
        std::ifstream g(gfile);
        if (!g) {
            std::cout << "[FAIL] " << scenario.name << ": missing golden file\n";
            all_ok = false;
            continue;
        }
        std::stringstream gs;
        gs << g.rdbuf();
        if (gs.str() == dumped) {
            std::cout << "[PASS] " << scenario.name << "\n";
        } else {
            std::cout << "[FAIL] " << scenario.name << ": payload differs from golden\n";
            all_ok = false;
        }
    }
    return all_ok ? kExitPositive : kExitNegative;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"p-curvature toolkit: sweeps, gauge reduction, numeric monodromy"};
    app.require_subcommand(1);

    std::string cache_dir;
    if (const char* env = std::getenv("PCURV_CACHE")) cache_dir = env;
    if (cache_dir.empty()) cache_dir = ".pcurv-cache";
    bool no_cache = false;
    EmitConfig emit;
    app.add_option("--cache-dir", cache_dir, "result cache directory");
    app.add_flag("--no-cache", no_cache, "bypass the result cache");
    app.add_option("--emit", emit.format, "output format: json or text")
        ->check(CLI::IsMember({"json", "text"}));

    std::string check_file, reduce_file, mono_file;
    long long primes_max = 0;
    long q_order = 0;
    std::vector<long long> check_primes;
    double tolerance = 0, step_fraction = 0;
    long k_max = 0;
    std::vector<double> q_samples;

    auto* c_check = app.add_subcommand("check", "p-curvature sweep over primes");
    c_check->add_option("file", check_file, "operator or scenario file")->required();
    c_check->add_option("--primes-max", primes_max, "sweep bound");

    auto* c_reduce = app.add_subcommand("reduce", "gauge reduction to a constant matrix");
    c_reduce->add_option("file", reduce_file, "operator or scenario file")->required();
    c_reduce->add_option("--q-order", q_order, "work modulo q^M");
    c_reduce->add_option("--check-primes", check_primes, "primes for the constant-part check");

    auto* c_mono = app.add_subcommand("monodromy", "numeric monodromy of the annulus");
    c_mono->add_option("file", mono_file, "operator or scenario file")->required();
    c_mono->add_option("--tolerance", tolerance, "finite-order tolerance");
    c_mono->add_option("--k-max", k_max, "largest order tried");
    c_mono->add_option("--step-fraction", step_fraction, "step size per distance to singularity");
    c_mono->add_option("--q-samples", q_samples, "family sample points in (0,1)");

    std::string corpus_dir = "corpus", golden_dir = "corpus/golden";
    bool update_golden = false;
    auto* c_corpus = app.add_subcommand("corpus-verify", "re-run corpus scenarios against goldens");
    c_corpus->add_option("--corpus", corpus_dir, "corpus directory");
    c_corpus->add_option("--golden", golden_dir, "golden directory");
    c_corpus->add_flag("--update-golden", update_golden, "rewrite golden files");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;
    }

    CacheConfig cache{fs::path(cache_dir), !no_cache};
    try {
        if (c_check->parsed()) {
            ScenarioDoc s = scenario_for_file(check_file, "check");
            if (primes_max > 0) s.check.primes_max = primes_max;
            return execute_scenario(s, cache, emit);
        }
        if (c_reduce->parsed()) {
            ScenarioDoc s = scenario_for_file(reduce_file, "reduce");
            if (q_order > 0) s.reduce.q_order = q_order;
            if (!check_primes.empty()) s.reduce.check_primes = check_primes;
            return execute_scenario(s, cache, emit);
        }
        if (c_mono->parsed()) {
            ScenarioDoc s = scenario_for_file(mono_file, "monodromy");
            if (tolerance > 0) s.monodromy.tolerance = tolerance;
            if (k_max > 0) s.monodromy.k_max = k_max;
            if (step_fraction > 0) s.monodromy.step_fraction = step_fraction;
            if (!q_samples.empty()) s.monodromy.q_samples = q_samples;
            return execute_scenario(s, cache, emit);
        }
        if (c_corpus->parsed())
            return run_corpus_verify(corpus_dir, golden_dir, update_golden, emit);
    } catch (const schema_version_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const negative_certificate& e) {
        std::cerr << "negative: " << e.what() << "\n";
        return kExitNegative;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitInput;
}

}  // namespace pcurv
