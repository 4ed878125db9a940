// Regenerates the corpus operator and scenario files.  Deterministic: the
// planted-gauge family uses a fixed seed, everything else is closed-form.
// Run from the repository root:  gen_corpus [corpus_dir]

#include <fstream>
#include <iostream>
#include <random>

#include "pcurv/gauge.hpp"
#include "pcurv/io.hpp"

using namespace pcurv;
namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << canonical_dump(j) << "\n";
    std::cout << "wrote " << path.string() << "\n";
}

Connection<LaurentQ> rank1_const(const Rat& c) {
    return companion_from_operator<LaurentQ>({lp_const(c)}, Derivation::t_ddt);
}

json scenario_json(const std::string& name, const std::string& op, const std::string& command,
                   const json& params) {
    json j;
    j["format_version"] = 1;
    j["kind"] = "scenario";
    j["name"] = name;
    j["operator"] = op;
    j["command"] = command;
    j[command] = params;
    return j;
}

json monodromy_params(const json& extra) {
    json base = {{"loop",
                  {{"center", {0.0, 0.0}},
                   {"radius", 1.0},
                   {"samples", 24},
                   {"counterclockwise", true},
                   {"clearance", 1e-8}}},
                 {"k_max", 24},
                 {"tolerance", 1e-6},
                 {"step_fraction", 1.0 / 3.0},
                 {"mode", "single"}};
    for (const auto& [k, v] : extra.items()) base[k] = v;
    return base;
}

}  // namespace

int main(int argc, char** argv) {
    fs::path dir = argc > 1 ? argv[1] : "corpus";
    fs::create_directories(dir);

    // ---- rank-1 constants ---------------------------------------------------
    const std::pair<const char*, Rat> consts[] = {
        {"rank1-zero", rat(0)},
        {"rank1-half", rat(1, 2)},
        {"rank1-third", rat(1, 3)},
        {"rank1-three-fifths", rat(3, 5)},
    };
    for (const auto& [name, c] : consts) {
        write_json(dir / (std::string(name) + ".operator.json"),
                   operator_to_json(rank1_const(c),
                                    name,
                                    "rank-1 connection with constant matrix [" + c.get_str() + "]",
                                    "psi_p = [c^p - c] = 0 in F_p for every prime not dividing "
                                    "the denominator; monodromy e^{-2 pi i c}"));
    }

    // ---- rank-1 t: nowhere-vanishing p-curvature ------------------------------
    write_json(dir / "rank1-t.operator.json",
               operator_to_json(companion_from_operator<LaurentQ>({lp_monomial(rat(1), 1)},
                                                                  Derivation::t_ddt),
                                "rank1-t", "rank-1 connection with matrix [t]",
                                "psi_p = [t^p]: a^p + D^(p-1)(a) - a with a = t gives t^p + t - t"));

    // ---- trivializable rank 2 --------------------------------------------------
    {
        // g = [[1, 3t], [2 t^-1, 7]], det = 1; A = -D(g) g^-1
        Matrix<LaurentQ> g(2, 2, lp_zero<Rat>());
        g.at(0, 0) = lp_const(rat(1));
        g.at(0, 1) = lp_monomial(rat(3), 1);
        g.at(1, 0) = lp_monomial(rat(2), -1);
        g.at(1, 1) = lp_const(rat(7));
        Matrix<LaurentQ> dg = mat_map(g, [](const LaurentQ& x) { return derivation_D(x); });
        Matrix<LaurentQ> ginv(2, 2, lp_zero<Rat>());
        ginv.at(0, 0) = lp_const(rat(7));
        ginv.at(0, 1) = lp_monomial(rat(-3), 1);
        ginv.at(1, 0) = lp_monomial(rat(-2), -1);
        ginv.at(1, 1) = lp_const(rat(1));
        Connection<LaurentQ> c;
        c.n = 2;
        c.der = Derivation::t_ddt;
        c.a = -(dg * ginv);
        write_json(dir / "trivializable-rank2.operator.json",
                   operator_to_json(c, "trivializable-rank2",
                                    "A = -D(g) g^{-1} for an invertible Laurent matrix g",
                                    "columns of g are a flat basis: psi_p = 0 for all good p and "
                                    "the monodromy is the identity"));
    }

    // ---- rank-2 direct sum 1/2 (+) 1/3 twisted by a polynomial gauge -----------
    {
        Connection<LaurentQ> c;
        c.n = 2;
        c.der = Derivation::t_ddt;
        c.a = Matrix<LaurentQ>(2, 2, lp_zero<Rat>());
        c.a.at(0, 0) = lp_const(rat(1, 2));
        c.a.at(1, 1) = lp_const(rat(1, 3));
        Matrix<LaurentQ> t(2, 2, lp_zero<Rat>());
        t.at(0, 0) = lp_const(rat(1));
        t.at(0, 1) = lp_monomial(rat(1), 1);
        t.at(1, 0) = lp_monomial(rat(1), -1);
        t.at(1, 1) = lp_const(rat(2));
        auto g = make_gauge(t, GaugeTag::generic);
        auto twisted = gauge_transform(c, g);
        write_json(dir / "direct-sum-sixth.operator.json",
                   operator_to_json(twisted, "direct-sum-sixth",
                                    "diag(1/2, 1/3) conjugated by a unimodular Laurent gauge",
                                    "monodromy eigenvalues e^{-pi i} and e^{-2 pi i/3}; order "
                                    "lcm(2, 3) = 6"));
    }

    // ---- hypergeometric (1/2, 1/2; 1) in the coordinate x = qt -----------------
    {
        auto conn = hypergeometric_companion(rat(1, 2), rat(1, 2), rat(1), 24);
        write_json(dir / "hypergeometric-half.operator.json",
                   operator_to_json(conn, "hypergeometric-half",
                                    "series companion of D(D+c-1) - x(D+a)(D+b) at a = b = 1/2, "
                                    "c = 1, written in x = qt",
                                    "annihilates the hypergeometric series in x = qt to 20 "
                                    "q-orders; classical nonzero p-curvature witness"));
    }

    // ---- exact growth witness ---------------------------------------------------
    {
        auto f0 = bs_monomial(rat(1), 2, -4);
        auto f1 = bs_monomial(rat(1), 0, -1);
        auto conn = companion_from_operator<BiQ>({f0, f1}, Derivation::t_ddt);
        write_json(dir / "growth-witness.operator.json",
                   operator_to_json(conn, "growth-witness",
                                    "rank-2 companion with last column q^-4 t^2, q^-1",
                                    "extremal data val_ell = -2, nu = 1; not bounded by 1, and "
                                    "psi_5 is nonzero at finite q-order"));
    }

    // ---- bi-series rank-1 [1/2] for the reduction pipeline ----------------------
    {
        Connection<BiQ> c;
        c.n = 1;
        c.der = Derivation::t_ddt;
        c.trunc = 6;
        c.a = Matrix<BiQ>(1, 1, bs_const(rat(1, 2), 6));
        c.basis = BasisTag::cyclic;
        write_json(dir / "rank1-half-biseries.operator.json",
                   operator_to_json(c, "rank1-half-biseries",
                                    "constant matrix [1/2] as a bi-series connection",
                                    "reduction succeeds after the pullback t -> s^2 and the "
                                    "twist by t^-1"));
    }

    // ---- Katz-check failure: matrix mod q depends on t ---------------------------
    {
        Connection<BiQ> c;
        c.n = 1;
        c.der = Derivation::t_ddt;
        c.trunc = 6;
        c.a = Matrix<BiQ>(1, 1, bs_monomial(rat(1), 1, 0, 6) + bs_monomial(rat(1), 2, 1, 6));
        write_json(dir / "katz-fail.operator.json",
                   operator_to_json(c, "katz-fail", "matrix [t + q t^2], non-constant modulo q",
                                    "the reduction pipeline must reject this input"));
    }

    // ---- planted-gauge family -----------------------------------------------------
    {
        const long m = 6;
        Connection<BiQ> zero;
        zero.n = 2;
        zero.der = Derivation::t_ddt;
        zero.trunc = m;
        zero.a = Matrix<BiQ>(2, 2, bs_zero<Rat>(m));
        Matrix<BiQ> ident(2, 2, bs_zero<Rat>(m));
        ident.at(0, 0) = bs_const(rat(1), m);
        ident.at(1, 1) = bs_const(rat(1), m);
        std::mt19937 rng(7032023);
        std::uniform_int_distribution<long> texp(1, 3);
        std::uniform_int_distribution<long> coef(-3, 3);
        Connection<BiQ> planted = zero;
        for (long stage = 1; stage <= 3; ++stage) {
            Matrix<BiQ> cm(2, 2, bs_zero<Rat>(m));
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s) {
                    long cv = coef(rng);
                    if (cv == 0) cv = 1;
                    cm.at(r, s) = bs_monomial(Rat(cv), texp(rng), stage, m);
                }
            auto g = make_gauge(ident - cm, GaugeTag::unipotent_step, m);
            planted = gauge_transform(planted, g);
        }
        write_json(dir / "planted-gauge.operator.json",
                   operator_to_json(planted, "planted-gauge",
                                    "trivial connection dressed by unipotent gauges "
                                    "(I - q^m C_m) with one-sided t-supports",
                                    "reduction returns a zero constant part and the inverse of "
                                    "the planted product; monodromy is the identity at every "
                                    "small q"));
    }

    // ---- order-jump family ----------------------------------------------------------
    {
        Connection<BiQ> c;
        c.n = 1;
        c.der = Derivation::t_ddt;
        c.trunc = 8;
        c.a = Matrix<BiQ>(1, 1, bs_const(rat(1, 2), 8) + bs_monomial(rat(1, 10), 0, 1, 8));
        write_json(dir / "orderjump-family.operator.json",
                   operator_to_json(c, "orderjump-family", "matrix [1/2 + q/10]",
                                    "eigenvalue e^{-2 pi i (1/2 + q/10)} is a root of unity only "
                                    "in the q -> 0 limit"));
    }

    // ---- congruence pairs --------------------------------------------------------------
    {
        Connection<BiQ> base;
        base.n = 1;
        base.der = Derivation::t_ddt;
        base.trunc = 8;
        base.a = Matrix<BiQ>(1, 1, bs_const(rat(1, 2), 8));
        base.basis = BasisTag::cyclic;
        write_json(dir / "rank1-half-family.operator.json",
                   operator_to_json(base, "rank1-half-family",
                                    "constant family [1/2]", "monodromy -1 at every q"));
        Connection<BiQ> pert = base;
        pert.a.at(0, 0) = pert.a.at(0, 0) + bs_monomial(rat(1), 0, 3, 8);
        write_json(dir / "rank1-half-q3.operator.json",
                   operator_to_json(pert, "rank1-half-q3", "matrix [1/2 + q^3]",
                                    "monodromy e^{-2 pi i (1/2 + q^3)}; difference from the "
                                    "constant family scales like q^3"));
        Connection<BiQ> pert2 = base;
        pert2.a.at(0, 0) =
            pert2.a.at(0, 0) + bs_monomial(rat(1), 1, 2, 8) + bs_monomial(rat(1), -1, 2, 8);
        write_json(dir / "rank1-half-residue-free.operator.json",
                   operator_to_json(pert2, "rank1-half-residue-free",
                                    "matrix [1/2 + q^2 (t + t^-1)]",
                                    "the loop integral only sees the t^0 coefficient, so the "
                                    "monodromy is unchanged"));
    }

    // ---- scenarios ----------------------------------------------------------------------
    write_json(dir / "check-three-fifths.scenario.json",
               scenario_json("check-three-fifths", "rank1-three-fifths.operator.json", "check",
                             {{"primes_max", 200}}));
    write_json(dir / "check-rank1-t.scenario.json",
               scenario_json("check-rank1-t", "rank1-t.operator.json", "check",
                             {{"primes_max", 50}}));
    write_json(dir / "check-hypergeometric.scenario.json",
               scenario_json("check-hypergeometric", "hypergeometric-half.operator.json", "check",
                             {{"primes_max", 30}}));
    write_json(dir / "check-trivializable.scenario.json",
               scenario_json("check-trivializable", "trivializable-rank2.operator.json", "check",
                             {{"primes_max", 50}}));

    write_json(dir / "reduce-planted.scenario.json",
               scenario_json("reduce-planted", "planted-gauge.operator.json", "reduce",
                             {{"q_order", 5}, {"check_primes", {5, 7}}}));
    write_json(dir / "reduce-rank1-half.scenario.json",
               scenario_json("reduce-rank1-half", "rank1-half-biseries.operator.json", "reduce",
                             {{"q_order", 4}, {"check_primes", {5, 7}}}));
    write_json(dir / "reduce-katz-fail.scenario.json",
               scenario_json("reduce-katz-fail", "katz-fail.operator.json", "reduce",
                             {{"q_order", 4}, {"check_primes", {5, 7}}}));

    write_json(dir / "monodromy-half.scenario.json",
               scenario_json("monodromy-half", "rank1-half.operator.json", "monodromy",
                             monodromy_params({})));
    write_json(dir / "monodromy-third.scenario.json",
               scenario_json("monodromy-third", "rank1-third.operator.json", "monodromy",
                             monodromy_params({})));
    write_json(dir / "monodromy-trivializable.scenario.json",
               scenario_json("monodromy-trivializable", "trivializable-rank2.operator.json",
                             "monodromy", monodromy_params({})));
    write_json(dir / "monodromy-direct-sum.scenario.json",
               scenario_json("monodromy-direct-sum", "direct-sum-sixth.operator.json", "monodromy",
                             monodromy_params({})));
    write_json(dir / "monodromy-congruence-q3.scenario.json",
               scenario_json("monodromy-congruence-q3", "rank1-half-family.operator.json",
                             "monodromy",
                             monodromy_params({{"mode", "congruence"},
                                               {"operator2", "rank1-half-q3.operator.json"},
                                               {"q_samples", {0.05, 0.1, 0.2}},
                                               {"congruence_order", 3},
                                               {"slope_tolerance", 0.1}})));
    write_json(dir / "monodromy-congruence-residue-free.scenario.json",
               scenario_json("monodromy-congruence-residue-free",
                             "rank1-half-family.operator.json", "monodromy",
                             monodromy_params(
                                 {{"mode", "congruence"},
                                  {"operator2", "rank1-half-residue-free.operator.json"},
                                  {"q_samples", {0.05, 0.1, 0.2}},
                                  {"congruence_order", 2},
                                  {"slope_tolerance", 0.1}})));
    write_json(dir / "monodromy-orderjump.scenario.json",
               scenario_json("monodromy-orderjump", "orderjump-family.operator.json", "monodromy",
                             monodromy_params({{"mode", "order_propagation"},
                                               {"q_samples", {1e-8, 0.3}}})));
    write_json(dir / "monodromy-bridge-planted.scenario.json",
               scenario_json("monodromy-bridge-planted", "planted-gauge.operator.json",
                             "monodromy",
                             monodromy_params({{"mode", "order_propagation"},
                                               {"q_samples", {0.05, 0.1}}})));
    return 0;
}
