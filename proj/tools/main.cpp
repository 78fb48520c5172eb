#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "congruence_lab/congruence_lab.hpp"
#include "emit.hpp"
#include "selftest.hpp"

using namespace congruence_lab;
using cli::json;

namespace {

enum exit_code { ok = 0, failed = 1, validation = 2, budget = 3 };

struct Globals {
    std::string format = "json";
    std::string output;
    unsigned threads = 0;
    std::optional<u64> budget;
    std::string config;
};

struct WeightArgs {
    std::string kind = "gaussian";
    std::optional<double> param;

    WeightSpec make() const {
        if (kind == "gaussian") return WeightSpec::gaussian(param.value_or(1.0));
        if (kind == "bump") return WeightSpec::bump_pair(param.value_or(1.0));
        if (kind == "sharp") return WeightSpec::sharp_cutoff(param.value_or(1.0));
        fail(errc::invalid_argument, "unknown weight '" + kind + "'");
    }
};

void add_weight_options(CLI::App* cmd, WeightArgs& w) {
    cmd->add_option("--weight", w.kind, "gaussian | bump | sharp")->check(CLI::IsMember({"gaussian", "bump", "sharp"}));
    cmd->add_option("--weight-param", w.param, "sigma, seed radius R, or half-width h");
}

std::pair<int, int> parse_range(const std::string& s) {
    const auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            const int v = std::stoi(s);
            return {v, v};
        }
        return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
    } catch (const std::exception&) {
        fail(errc::invalid_argument, "range '" + s + "' must look like a..b");
    }
}

double resolve_N(std::optional<double> N, std::optional<double> theta, const PrimePowerModulus& mod) {
    if (N && theta) fail(errc::invalid_argument, "give either --N or --theta, not both");
    if (N) return *N;
    if (theta) return std::ceil(std::pow(static_cast<double>(mod.q()), *theta));
    fail(errc::invalid_argument, "one of --N or --theta is required");
}

json form_json(const DiagonalForm& f) {
    return json{{"lambda", f.lambdas}, {"constant", f.inhomogeneous_term}};
}

json report_json(const CountReport& r) {
    return json{{"form", form_json(r.form)},
                {"p", r.p},
                {"m", r.m},
                {"q", cli::integer_json(PrimePowerModulus(r.p, r.m).q())},
                {"N", r.N},
                {"weight", r.weight},
                {"coprimality", mode_name(r.mode)},
                {"method", r.method},
                {"T", r.T},
                {"T0", r.T0},
                {"ratio", r.ratio},
                {"density", cli::rational_json(r.density)},
                {"box_radius", r.box_radius},
                {"points_enumerated", r.points_enumerated},
                {"frequencies_used", r.frequencies_used},
                {"k_cutoff", r.k_cutoff},
                {"truncation_bound", r.truncation_bound}};
}

json exact_json(const ExactCharSum& s) {
    return json{{"is_zero", s.is_zero},
                {"rational_factor", cli::integer_json(s.rational_factor)},
                {"sign", s.sign},
                {"epsilon", s.eps == EpsilonFactor::one ? "1" : "i"},
                {"sqrt_arg", cli::integer_json(s.sqrt_arg)},
                {"phase", json{{"num", cli::integer_json(s.phase_num)}, {"den", cli::integer_json(s.phase_den)}}}};
}

json kloosterman_json(const KloostermanClosedForm& k) {
    json terms = json::array();
    for (const auto& t : k.terms)
        terms.push_back(json{{"quarter_turns", t.quarter_turns}, {"phase", json{{"num", cli::integer_json(t.phase_num)}, {"den", cli::integer_json(k.modulus())}}}});
    return json{{"is_zero", k.is_zero}, {"scale_sqrt", cli::integer_json(k.modulus())}, {"terms", terms}};
}

// Command-line flags win over config values; config values are injected as extra arguments.
std::vector<std::string> apply_config(const std::vector<std::string>& args, CLI::App& app) {
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") path = args[i + 1];
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) fail(errc::invalid_argument, "cannot read config file " + path);
    CLI::App* sub = nullptr;
    for (const auto& a : args)
        if (!sub) sub = app.get_subcommand_no_throw(a);
    std::vector<std::string> out = args;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\"");
            const auto e = s.find_last_not_of(" \t\r\"");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos) fail(errc::invalid_argument, path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        const std::string flag = "--" + key;
        if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
        CLI::Option* opt = sub ? sub->get_option_no_throw(flag) : nullptr;
        if (!opt) opt = app.get_option_no_throw(flag);
        if (!opt) fail(errc::invalid_argument, path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (opt->get_type_size() == 0) {
            if (value == "true" || value == "1") out.push_back(flag);
            continue;
        }
        out.push_back(flag);
        std::istringstream tokens(value);
        for (std::string tok; tokens >> tok;) out.push_back(tok);
    }
    return out;
}

u64 default_budget() {
    if (const char* env = std::getenv("CONGRUENCE_LAB_BUDGET")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            fail(errc::invalid_argument, "CONGRUENCE_LAB_BUDGET must be a positive integer");
        }
    }
    return default_operation_budget;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quadratic congruence counting and character sums"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--format", g.format, "json | csv | plain")->check(CLI::IsMember({"json", "csv", "plain"}));
    app.add_option("--output", g.output, "write to this file instead of stdout");
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
    app.add_option("--budget", g.budget, "inner-loop operation budget");
    app.add_option("--config", g.config, "key = value file with the same keys as the flags");

    bool selftest_failed = false;

    // eval-gauss
    i64 ga = 0, gb = 0, gm = 1;
    u64 gp = 3;
    bool g_check = false;
    auto* eg = app.add_subcommand("eval-gauss", "G(a, b, p^m) in closed form");
    eg->add_option("a", ga)->required();
    eg->add_option("b", gb)->required();
    eg->add_option("p", gp)->required();
    eg->add_option("m", gm)->required();
    eg->add_flag("--check", g_check, "also sum the definition directly");

    // eval-kloosterman
    bool salie = false, k_check = false;
    auto* ek = app.add_subcommand("eval-kloosterman", "K0 or K1 (with --salie) at (a, b, p^m)");
    ek->add_option("a", ga)->required();
    ek->add_option("b", gb)->required();
    ek->add_option("p", gp)->required();
    ek->add_option("m", gm)->required();
    ek->add_flag("--salie", salie, "Jacobi-twisted sum");
    ek->add_flag("--check", k_check, "also sum the definition directly");

    // density
    std::string dkind;
    std::vector<i64> lambdas;
    std::optional<i64> constant;
    u64 dp = 3;
    auto* dn = app.add_subcommand("density", "local densities A, B or the ternary constant C");
    dn->add_option("kind", dkind, "A | B | C")->required()->check(CLI::IsMember({"A", "B", "C"}));
    dn->add_option("--lambda", lambdas, "coefficients lambda_1 .. lambda_n")->required();
    dn->add_option("--constant", constant, "lambda_{n+1} (B only)");
    dn->add_option("--p", dp, "prime")->required();

    // count and verify-asymptotic
    std::string cmode = "inhom", coprime, method = "direct", strategy = "auto", m_range = "2..4";
    u64 cp = 3;
    int cm = 2;
    std::optional<double> cN, ctheta;
    i64 kcut = 0;
    WeightArgs cw;
    auto add_count_options = [&](CLI::App* cmd, bool single_m) {
        cmd->add_option("--mode", cmode, "inhom | hom")->check(CLI::IsMember({"inhom", "hom"}));
        cmd->add_option("--lambda", lambdas, "coefficients lambda_1 .. lambda_n")->required();
        cmd->add_option("--constant", constant, "lambda_{n+1} (inhom; default 1)");
        cmd->add_option("--p", cp, "prime")->required();
        if (single_m)
            cmd->add_option("--m", cm, "exponent")->required();
        else
            cmd->add_option("--m-range", m_range, "exponents a..b");
        cmd->add_option("--N", cN, "box scale");
        cmd->add_option("--theta", ctheta, "N = ceil(q^theta)");
        cmd->add_option("--coprimality", coprime, "units | not-all-zero (default by mode)")
            ->check(CLI::IsMember({"units", "not-all-zero"}));
        cmd->add_option("--method", method, "direct | spectral")->check(CLI::IsMember({"direct", "spectral"}));
        cmd->add_option("--strategy", strategy, "direct strategy: auto | enumerate | histogram")
            ->check(CLI::IsMember({"auto", "enumerate", "histogram"}));
        cmd->add_option("--k-cutoff", kcut, "spectral frequency cutoff (0 = automatic)");
        add_weight_options(cmd, cw);
    };
    auto* ct = app.add_subcommand("count", "weighted solution count T against the main term T0");
    add_count_options(ct, true);
    auto* va = app.add_subcommand("verify-asymptotic", "ratio T/T0 over a range of exponents");
    add_count_options(va, false);

    // expsum-scan
    u64 sp = 3, seed = 1;
    std::string s_range = "2..10";
    int trials = 50;
    auto* es = app.add_subcommand("expsum-scan", "normalized square-root sums over random parameters");
    es->add_option("--p", sp, "prime");
    es->add_option("--s-range", s_range, "exponents a..b");
    es->add_option("--trials", trials, "tuples per exponent");
    es->add_option("--seed", seed, "generator seed");

    // tau
    i64 tk = 1;
    std::vector<i64> deltas;
    int tr = 0;
    auto* ta = app.add_subcommand("tau", "weighted representation number of the dual form");
    ta->add_option("k", tk)->required();
    ta->add_option("--lambda", lambdas, "coefficients of the source form");
    ta->add_option("--constant", constant, "lambda_{n+1} of the source form");
    ta->add_option("--deltas", deltas, "dual coefficients given directly");
    ta->add_option("--p", cp, "prime")->required();
    ta->add_option("--m", cm, "exponent")->required();
    ta->add_option("--r", tr, "frequency valuation r");
    ta->add_option("--N", cN, "box scale");
    ta->add_option("--theta", ctheta, "N = ceil(q^theta)");
    add_weight_options(ta, cw);

    // singular-series
    int q_max = 50;
    auto* ss = app.add_subcommand("singular-series", "truncated singular series of the dual form");
    ss->add_option("k", tk)->required();
    ss->add_option("--deltas", deltas, "dual coefficients")->required();
    ss->add_option("--p", cp, "prime")->required();
    ss->add_option("--q-max", q_max, "truncation level");

    // quad-count
    std::vector<i64> alphas;
    i64 qb = 0, qM = 1;
    int qs = 2;
    auto* qc = app.add_subcommand("quad-count", "quadruples |l_i| <= M with sum alpha_i l_i^2 = b mod p^s");
    qc->add_option("--alpha", alphas, "four coefficients")->required()->expected(4);
    qc->add_option("--b", qb, "target residue");
    qc->add_option("--p", cp, "prime")->required();
    qc->add_option("--s", qs, "exponent")->required();
    qc->add_option("--M", qM, "coordinate bound")->required();

    // selftest
    bool quick = false;
    auto* st = app.add_subcommand("selftest", "oracle-agreement suites");
    st->add_flag("--quick", quick, "smaller grids");
    st->add_option("--seed", seed, "generator seed");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config(args, app);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : validation;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return validation;
    }

    try {
        set_threads(g.threads);
        const Budget bud{g.budget ? *g.budget : default_budget()};
        json result;

        if (*eg) {
            PrimePowerModulus mod(gp, static_cast<int>(gm));
            const auto closed = gauss_sum_closed(ga, gb, mod);
            const auto z = closed.to_complex();
            result = json{{"command", "eval-gauss"}, {"a", ga}, {"b", gb}, {"p", gp}, {"m", gm}, {"re", z.real()}, {"im", z.imag()},
                          {"closed_form", exact_json(closed)}};
            if (g_check) {
                bud.charge(static_cast<long double>(mod.q()), "eval-gauss --check");
                result["bruteforce"] = cli::complex_json(gauss_sum_bruteforce(ga, gb, mod.q64()));
            }
        } else if (*ek) {
            PrimePowerModulus mod(gp, static_cast<int>(gm));
            result = json{{"command", "eval-kloosterman"}, {"kind", salie ? "salie" : "kloosterman"}, {"a", ga}, {"b", gb}, {"p", gp}, {"m", gm}};
            std::complex<double> z;
            if (detail::classify_unit_sum(ga, gb, mod) != detail::UnitSumCase::unsupported) {
                const auto closed = salie ? salie_closed(ga, gb, mod) : kloosterman_closed(ga, gb, mod);
                z = closed.to_complex();
                result["method"] = "closed_form";
                result["closed_form"] = kloosterman_json(closed);
            } else {
                bud.charge(static_cast<long double>(mod.q()), "eval-kloosterman");
                z = salie ? salie_bruteforce(ga, gb, mod.q64()) : kloosterman_bruteforce(ga, gb, mod.q64());
                result["method"] = "bruteforce";
            }
            result["re"] = z.real();
            result["im"] = z.imag();
            if (k_check) {
                bud.charge(static_cast<long double>(mod.q()), "eval-kloosterman --check");
                result["bruteforce"] = cli::complex_json(salie ? salie_bruteforce(ga, gb, mod.q64()) : kloosterman_bruteforce(ga, gb, mod.q64()));
            }
        } else if (*dn) {
            Rational value(0);
            if (dkind == "A") {
                if (constant && *constant != 0) fail(errc::not_homogeneous, "density A is for homogeneous forms");
                value = density_A(DiagonalForm(lambdas, 0), dp, bud).as_rational;
            } else if (dkind == "B") {
                if (!constant) fail(errc::invalid_argument, "density B needs --constant");
                value = density_B(DiagonalForm(lambdas, *constant), dp, bud).as_rational;
            } else {
                if (lambdas.size() != 3) fail(errc::invalid_argument, "density C needs exactly three coefficients");
                value = ternary_C_p(lambdas[0], lambdas[1], lambdas[2], dp);
            }
            result = json{{"command", "density"}, {"kind", dkind}, {"p", dp}, {"lambda", lambdas}};
            if (constant) result["constant"] = *constant;
            result["density"] = cli::rational_json(value);
            result["value"] = value.to_double();
        } else if (*ct || *va) {
            const bool hom = cmode == "hom";
            if (hom && constant && *constant != 0) fail(errc::invalid_argument, "--mode hom needs constant 0");
            DiagonalForm form(lambdas, hom ? 0 : constant.value_or(1));
            if (!hom && form.inhomogeneous_term == 0) fail(errc::invalid_argument, "--mode inhom needs a nonzero constant");
            const CoprimalityMode mode = coprime.empty() ? (hom ? CoprimalityMode::not_all_zero_mod_p : CoprimalityMode::all_units)
                                         : coprime == "units"  ? CoprimalityMode::all_units
                                                               : CoprimalityMode::not_all_zero_mod_p;
            const DirectStrategy strat = strategy == "enumerate"   ? DirectStrategy::last_coordinate
                                         : strategy == "histogram" ? DirectStrategy::residue_histogram
                                                                   : DirectStrategy::automatic;
            const WeightSpec w = cw.make();
            auto one = [&](int m) {
                PrimePowerModulus mod(cp, m);
                const double N = resolve_N(cN, ctheta, mod);
                if (method == "spectral") {
                    if (mode != CoprimalityMode::all_units) fail(errc::invalid_argument, "spectral counts support units coprimality only");
                    return count_weighted_spectral(form, mod, N, w, kcut, bud);
                }
                return count_weighted_direct(form, mod, N, w, mode, strat, bud);
            };
            if (*ct) {
                result = json{{"command", "count"}};
                result.update(report_json(one(cm)));
            } else {
                const auto [lo, hi] = parse_range(m_range);
                if (lo < 1 || hi < lo) fail(errc::invalid_argument, "--m-range must satisfy 1 <= a <= b");
                json rows = json::array();
                double last = 0;
                for (int m = lo; m <= hi; ++m) {
                    const auto r = one(m);
                    rows.push_back(json{{"m", m}, {"q", cli::integer_json(PrimePowerModulus(cp, m).q())}, {"N", r.N}, {"T", r.T}, {"T0", r.T0}, {"ratio", r.ratio}, {"method", r.method}});
                    last = r.ratio;
                }
                result = json{{"command", "verify-asymptotic"}, {"form", form_json(form)}, {"p", cp}, {"weight", w.str()},
                              {"coprimality", mode_name(mode)}, {"rows", rows}, {"final_ratio", last}};
            }
        } else if (*es) {
            const auto [lo, hi] = parse_range(s_range);
            const auto rows = bound_scan(sp, lo, hi, trials, seed, bud);
            json out_rows = json::array();
            for (const auto& r : rows) {
                const auto& P = r.params;
                out_rows.push_back(json{{"p", P.p}, {"s", P.s}, {"Lambda", P.Lambda}, {"a", P.a ? json(*P.a) : json(nullptr)}, {"b", P.b}, {"c", P.c},
                                        {"K", P.K}, {"mu", P.mu}, {"re", r.sum_value.real()}, {"im", r.sum_value.imag()},
                                        {"abs", std::abs(r.sum_value)}, {"normalized", r.normalized}});
            }
            result = json{{"command", "expsum-scan"}, {"p", sp}, {"s_range", json::array({lo, hi})}, {"trials", trials}, {"seed", seed},
                          {"max_normalized", bound_scan_max(rows)}, {"rows", out_rows}};
        } else if (*ta) {
            PrimePowerModulus mod(cp, cm);
            DualForm dual;
            if (!deltas.empty()) {
                dual = DualForm(deltas);
            } else {
                if (lambdas.empty() || !constant) fail(errc::invalid_argument, "tau needs --deltas or --lambda with --constant");
                dual = DualForm::from_form(DiagonalForm(lambdas, *constant), mod);
            }
            const double N = resolve_N(cN, ctheta, mod);
            const WeightSpec w = cw.make();
            result = json{{"command", "tau"}, {"k", tk}, {"deltas", dual.deltas}};
            if (dual.modulus != 0) result["Lambda"] = dual.Lambda;
            result.update(json{{"p", cp}, {"m", cm}, {"r", tr}, {"N", N}, {"weight", w.str()},
                               {"representations", representation_count(tk, dual, cp, bud)},
                               {"tau", tau_n(tk, dual, tr, w, mod, N, bud)}});
        } else if (*ss) {
            const auto data = singular_series(tk, DualForm(deltas), cp, q_max, bud);
            json coeffs = json::object();
            for (int q = 1; q <= q_max; ++q) coeffs[std::to_string(q)] = data.coefficients[static_cast<std::size_t>(q - 1)];
            result = json{{"command", "singular-series"}, {"k", tk}, {"p", cp}, {"deltas", deltas}, {"q_max", q_max}, {"coefficients", coeffs},
                          {"partial_sum", data.partial_sum}, {"decay_constant", data.decay_constant}, {"tail_bound", data.tail_bound}};
        } else if (*qc) {
            std::array<i64, 4> a{alphas[0], alphas[1], alphas[2], alphas[3]};
            const u64 count = quadruple_count(a, qb, PrimePowerModulus(cp, qs), qM, bud);
            result = json{{"command", "quad-count"}, {"alpha", alphas}, {"b", qb}, {"p", cp}, {"s", qs}, {"M", qM}, {"count", count},
                          {"count_over_M2", qM > 0 ? static_cast<double>(count) / static_cast<double>(qM * qM) : 0.0}};
        } else if (*st) {
            bool pass = false;
            result = cli::run_selftest(seed, quick, pass);
            selftest_failed = !pass;
        }

        const std::string text = g.format == "csv" ? cli::to_csv_text(result) : g.format == "plain" ? cli::to_plain_text(result) : cli::to_json_text(result);
        if (g.output.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(g.output, std::ios::binary);
            if (!out) fail(errc::invalid_argument, "cannot write " + g.output);
            out << text;
        }
        return selftest_failed ? failed : ok;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == errc::budget_exceeded ? budget : validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failed;
    }
}
