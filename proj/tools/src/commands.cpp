#include "mal/cli/commands.hpp"

#include "mal/action.hpp"
#include "mal/cli/spec_io.hpp"
#include "mal/error.hpp"
#include "mal/fields.hpp"
#include "mal/geodesic.hpp"
#include "mal/rearrangement.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace mal::cli {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool wants(const ExperimentConfig& c, const std::string& format) {
    return std::find(c.output.formats.begin(), c.output.formats.end(), format) != c.output.formats.end();
}

Potential endpoint(const Grid& grid, const EndpointConfig& e, const std::string& name) {
    try {
        return make_potential(trig_field(grid, e.constant, e.amplitudes));
    } catch (const NotKahler& err) {
        throw ConfigError("fixture.amplitudes_" + name, err.what());
    }
}

std::vector<LagrangianSpec> specs_of(const RunContext& ctx) {
    std::vector<LagrangianSpec> out;
    for (const auto& text : ctx.config.lagrangian.specs) out.push_back(parse_spec(text, ctx.base_dir));
    return out;
}

WeakGeodesicOptions weak_options(const ExperimentConfig& c) {
    WeakGeodesicOptions o;
    o.a = 0.0;
    o.b = c.geodesic.T;
    o.tol = c.geodesic.weak_tol;
    o.time_steps = c.geodesic.time_steps;
    o.solver_tol = c.geodesic.solver_tol;
    o.max_iter = c.geodesic.max_iter;
    o.epsilon0 = c.geodesic.epsilon_schedule.front() > 0.0 ? c.geodesic.epsilon_schedule.front() : 1.0;
    o.max_final_epsilon = c.geodesic.max_final_epsilon;
    return o;
}

void write_path_csv(const std::filesystem::path& file, const PotentialPath& path) {
    std::ofstream out(file);
    out << "t,i,j,u\n";
    const int n = path.grid().n();
    for (std::size_t k = 0; k < path.size(); ++k) {
        const std::string t = g17(path.times()[k]);
        const GridField& u = path.knot(k).field();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) out << t << ',' << i << ',' << j << ',' << g17(u(i, j)) << '\n';
        }
    }
}

void write_residual_csv(const std::filesystem::path& file, const PotentialPath& path,
                        const std::vector<GridField>& residual) {
    std::ofstream out(file);
    out << "t,i,j,c\n";
    const int n = path.grid().n();
    for (std::size_t k = 0; k < residual.size(); ++k) {
        const std::string t = g17(path.times()[k + 1]);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) out << t << ',' << i << ',' << j << ',' << g17(residual[k](i, j)) << '\n';
        }
    }
}

std::string shortest(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct RecordSink {
    const RunContext& ctx;
    std::string hash;
    std::ofstream file;
    bool all_pass = true;

    void emit(const VerificationReport& r) {
        for (const auto& c : r.checks) {
            Json j;
            j["experiment"] = r.experiment;
            j["check"] = c.check;
            j["value"] = c.value;
            if (c.informational) {
                j["tolerance"] = nullptr;
            } else {
                j["tolerance"] = c.tolerance;
            }
            j["pass"] = c.pass;
            j["seed"] = r.seed;
            j["N"] = r.n;
            j["time_steps"] = r.time_steps;
            j["epsilon"] = r.epsilon;
            j["config_hash"] = hash;
            if (c.negative_control) {
                j["control"] = c.pass ? "expected-fail: observed-fail" : "expected-fail: observed-pass";
            }
            if (c.informational) j["informational"] = true;
            if (!c.samples.empty()) j["samples"] = c.samples;
            const std::string line = j.dump();
            ctx.out << line << '\n';
            if (file) file << line << '\n';
            all_pass = all_pass && c.pass;
        }
    }
};

std::vector<int> default_centers(int m, int spacing) {
    std::vector<int> centers;
    for (int k = 1; k <= 5; ++k) centers.push_back(std::clamp(m * (k + 1) / 7, spacing, m - spacing));
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
    return centers;
}

void run_suite(const std::string& suite, const RunContext& ctx, RecordSink& sink) {
    const ExperimentConfig& c = ctx.config;
    const auto& v = c.verification;
    const std::vector<LagrangianSpec> specs = specs_of(ctx);
    const auto [w, w_prime] = fixture_endpoints(c);
    const WeakGeodesicOptions weak = weak_options(c);
    const double T = c.geodesic.T;

    if (suite == "least_action") {
        CompetitorOptions co;
        co.knot_budget = v.knot_budget;
        co.amplitude = v.competitor_amplitude;
        sink.emit(verify_least_action(specs, w, w_prime, T, v.count, v.seed, v.tolerance, weak, co));
    } else if (suite == "comparison") {
        for (const auto& spec : specs) {
            if (!spec.positively_homogeneous()) {
                throw ConfigError("lagrangian.spec", "suite comparison needs positively homogeneous specs, got " +
                                                         spec.text());
            }
        }
        TriangleOptions to;
        to.epsilon = v.triangle_epsilon;
        to.time_steps = c.geodesic.time_steps;
        to.solver_tol = c.geodesic.solver_tol;
        to.max_iter = c.geodesic.max_iter;
        to.weak = weak;
        const PotentialPath u = competitor_paths(w, w_prime, T, 1, v.seed)[0];
        std::mt19937_64 rng(v.seed);
        const GridField h = random_band_limited(w.grid(), 2, rng);
        const Potential apex = make_potential(w.field() + h * admissible_scale(w, h, 0.5, 0.02));
        for (const auto& spec : specs) {
            VerificationReport degenerate = verify_comparison_inequality(spec, u, w, v.tolerance, to);
            degenerate.seed = v.seed;
            sink.emit(degenerate);
            VerificationReport triangle = verify_comparison_inequality(spec, u, apex, v.tolerance, to);
            triangle.seed = v.seed;
            sink.emit(triangle);
        }
    } else if (suite == "noether") {
        const WeakGeodesic g = weak_geodesic(w, w_prime, weak);
        NoetherOptions no;
        no.tol = v.tolerance;
        VerificationReport r = verify_noether(specs, g.path, no);
        r.epsilon = g.final_epsilon;
        r.seed = v.seed;
        sink.emit(r);
    } else if (suite == "jacobi_convexity") {
        EpsGeodesicProblem p{w, w_prime, 0.0, T, v.jacobi_epsilon, c.geodesic.time_steps, c.geodesic.solver_tol,
                             c.geodesic.max_iter};
        std::mt19937_64 rng(v.seed);
        const GridField da = random_band_limited(w.grid(), 2, rng);
        const GridField db = random_band_limited(w.grid(), 2, rng);
        JacobiConvexityOptions jo;
        jo.delta = v.jacobi_delta;
        jo.tol = v.jacobi_tolerance;
        jo.seed = v.seed;
        sink.emit(verify_jacobi_convexity(specs, p, da, db, jo));
    } else if (suite == "action_convexity") {
        const auto [c0, d0] = second_pair(c);
        const WeakGeodesic gu = weak_geodesic(w, w_prime, weak);
        const WeakGeodesic gv = weak_geodesic(c0, d0, weak);
        const int m = c.geodesic.time_steps;
        const int spacing = v.convexity_spacing > 0 ? v.convexity_spacing : std::max(1, m / 8);
        const std::vector<int> centers = v.convexity_centers.empty() ? default_centers(m, spacing) : v.convexity_centers;
        for (int k : centers) {
            if (k - spacing < 0 || k + spacing > m) {
                throw ConfigError("verification.convexity_centers", "triple around knot " + std::to_string(k) +
                                                                        " leaves [0, time_steps]");
            }
        }
        VerificationReport r = verify_action_convexity(specs, gu.path, gv.path, v.S, centers, spacing, v.tolerance, weak);
        r.seed = v.seed;
        sink.emit(r);
    } else if (suite == "least_action_continuity") {
        const auto [ws, wps] = decreasing_sequences(w, w_prime, v.sequence_length, v.seed);
        VerificationReport r = verify_least_action_continuity(specs, ws, wps, w, w_prime, T, v.tolerance, weak);
        r.seed = v.seed;
        sink.emit(r);
    } else if (suite == "monotone_limit") {
        const auto [as, bs] = decreasing_sequences(w, w_prime, v.sequence_length, v.seed);
        const MonotoneLimitReport m = monotone_limit_check(as, bs, w, w_prime, weak);
        VerificationReport r;
        r.experiment = "monotone_limit";
        r.tolerance = v.tolerance;
        r.seed = v.seed;
        r.n = w.grid().n();
        r.time_steps = c.geodesic.time_steps;
        r.epsilon = 0.0;
        r.add_check("monotone knots", *std::max_element(m.monotonicity_violations.begin(),
                                                         m.monotonicity_violations.end()),
                    v.tolerance, m.monotonicity_violations);
        r.add_check("limit below members", *std::max_element(m.limit_violations.begin(), m.limit_violations.end()),
                    v.tolerance, m.limit_violations);
        r.add_check("tail distance", m.final_distance, v.tolerance, m.distances);
        const MonotoneLimitReport up = monotone_limit_check({as.back(), as.front()}, {bs.back(), bs.front()}, w,
                                                            w_prime, weak);
        r.add_control("increasing sequence", up.monotonicity_violations.front(), v.tolerance);
        sink.emit(r);
    }
}

}  // namespace

std::pair<Potential, Potential> fixture_endpoints(const ExperimentConfig& config) {
    const Grid grid(config.grid.n, config.grid.scheme);
    return {endpoint(grid, config.fixture.a, "a"), endpoint(grid, config.fixture.b, "b")};
}

std::pair<Potential, Potential> second_pair(const ExperimentConfig& config) {
    const Grid grid(config.grid.n, config.grid.scheme);
    if (!config.fixture.has_second_pair) {
        return {endpoint(grid, config.fixture.b, "b"), endpoint(grid, config.fixture.a, "a")};
    }
    return {endpoint(grid, config.fixture.c, "c"), endpoint(grid, config.fixture.d, "d")};
}

int cmd_solve(const RunContext& ctx) {
    const ExperimentConfig& c = ctx.config;
    const std::string hash = config_hash(c);
    const auto start = Clock::now();
    const auto [ua, ub] = fixture_endpoints(c);

    std::optional<PotentialPath> path;
    double epsilon = 0.0;
    double residual = 0.0;
    int iterations = 0;
    Json history = Json::array();
    Json epsilons = Json::array();
    Json distances = Json::array();
    try {
        if (c.geodesic.mode == "weak") {
            const WeakGeodesic g = weak_geodesic(ua, ub, weak_options(c));
            path = g.path;
            epsilon = g.final_epsilon;
            residual = g.residual_norm;
            epsilons = g.epsilons;
            distances = g.successive_distances;
            history = g.residual_histories;
            for (int it : g.iterations) iterations += it;
        } else {
            std::optional<std::vector<GridField>> warm;
            for (double eps : c.geodesic.epsilon_schedule) {
                EpsGeodesicProblem p{ua, ub, 0.0, c.geodesic.T, eps, c.geodesic.time_steps, c.geodesic.solver_tol,
                                     c.geodesic.max_iter};
                GeodesicSolution sol = solve_epsilon_geodesic(p, warm);
                warm.emplace();
                for (const auto& k : sol.path.knots()) warm->push_back(k.field());
                epsilons.push_back(eps);
                history.push_back(sol.residual_history);
                iterations += sol.iterations;
                epsilon = eps;
                residual = sol.residual_norm;
                path = std::move(sol.path);
            }
        }
    } catch (const NonConvergence& e) {
        ctx.err << "solver failure: " << e.what() << '\n';
        return exit_solver_failure;
    } catch (const PositivityLoss& e) {
        ctx.err << "solver failure: " << e.what() << '\n';
        return exit_solver_failure;
    }

    const std::vector<GridField> hcma = hcma_residual(*path);
    double hcma_dev = 0.0;
    for (const auto& f : hcma) {
        for (double x : f.values()) hcma_dev = std::max(hcma_dev, std::abs(x - epsilon));
    }

    const std::filesystem::path dir = c.output.directory;
    std::filesystem::create_directories(dir);
    if (wants(c, "csv")) {
        write_path_csv(dir / "path.csv", *path);
        write_residual_csv(dir / "hcma_residual.csv", *path, hcma);
    }
    if (wants(c, "json")) {
        Json meta;
        meta["config_hash"] = hash;
        meta["N"] = c.grid.n;
        meta["scheme"] = std::string(to_string(c.grid.scheme));
        meta["T"] = c.geodesic.T;
        meta["time_steps"] = c.geodesic.time_steps;
        meta["mode"] = c.geodesic.mode;
        meta["epsilon"] = epsilon;
        meta["epsilons"] = epsilons;
        meta["successive_distances"] = distances;
        meta["residual_norm"] = residual;
        meta["iterations"] = iterations;
        meta["residual_history"] = history;
        meta["hcma_max_deviation"] = hcma_dev;
        std::ofstream(dir / "path.json") << meta.dump(2) << '\n';
    }
    ctx.out << "solved: epsilon=" << g17(epsilon) << " residual=" << g17(residual)
            << " hcma_max_deviation=" << g17(hcma_dev) << " config_hash=" << hash << '\n';
    ctx.err << "[timing] solve " << seconds_since(start) << " s\n";
    return exit_pass;
}

int cmd_verify(const RunContext& ctx) {
    const ExperimentConfig& c = ctx.config;
    if (c.verification.suites.empty()) throw ConfigError("verification.suites", "name at least one suite");
    RecordSink sink{ctx, config_hash(c), {}};
    if (wants(c, "json")) {
        std::filesystem::create_directories(c.output.directory);
        sink.file.open(std::filesystem::path(c.output.directory) / "verify.jsonl");
    }
    for (const auto& suite : c.verification.suites) {
        const auto start = Clock::now();
        try {
            run_suite(suite, ctx, sink);
        } catch (const NonConvergence& e) {
            ctx.err << "solver failure in " << suite << ": " << e.what() << '\n';
            return exit_solver_failure;
        } catch (const PositivityLoss& e) {
            ctx.err << "solver failure in " << suite << ": " << e.what() << '\n';
            return exit_solver_failure;
        } catch (const StepUnstable& e) {
            ctx.err << "solver failure in " << suite << ": " << e.what() << '\n';
            return exit_solver_failure;
        } catch (const PerturbationTooLarge& e) {
            ctx.err << "solver failure in " << suite << ": " << e.what() << '\n';
            return exit_solver_failure;
        }
        ctx.err << "[timing] " << suite << ' ' << seconds_since(start) << " s\n";
    }
    return sink.all_pass ? exit_pass : exit_violation;
}

int cmd_rearrange(const std::filesystem::path& in_path, const std::filesystem::path& out_path, std::ostream& err) {
    std::ifstream in(in_path);
    if (!in) {
        err << "cannot open " << in_path.string() << '\n';
        return exit_config_error;
    }
    std::vector<double> values;
    std::vector<double> weights;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line_no == 1 && line.find_first_of("0123456789") == std::string::npos) continue;
        std::istringstream row(line);
        std::string a;
        std::string b;
        std::string extra;
        double v = 0.0;
        double w = 0.0;
        std::size_t used_a = 0;
        std::size_t used_b = 0;
        bool ok = std::getline(row, a, ',') && std::getline(row, b, ',') && !std::getline(row, extra, ',');
        if (ok) {
            try {
                v = std::stod(a, &used_a);
                w = std::stod(b, &used_b);
                ok = a.find_first_not_of(" \t", used_a) == std::string::npos &&
                     b.find_first_not_of(" \t", used_b) == std::string::npos;
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok || !std::isfinite(v) || !std::isfinite(w)) {
            err << in_path.string() << ":" << line_no << ": expected 'value,weight'\n";
            return exit_config_error;
        }
        if (!(w > 0.0)) {
            err << in_path.string() << ":" << line_no << ": weight must be positive\n";
            return exit_config_error;
        }
        values.push_back(v);
        weights.push_back(w);
    }
    if (values.empty()) {
        err << in_path.string() << ": no rows\n";
        return exit_config_error;
    }
    const StepFunction f = decreasing_rearrangement(WeightedValues(std::move(values), std::move(weights)));
    std::ofstream out(out_path);
    if (!out) {
        err << "cannot write " << out_path.string() << '\n';
        return exit_config_error;
    }
    out << "breakpoint,level\n";
    for (std::size_t k = 0; k < f.steps(); ++k) out << shortest(f.breakpoints()[k + 1]) << ',' << shortest(f.levels()[k]) << '\n';
    return exit_pass;
}

}  // namespace mal::cli
