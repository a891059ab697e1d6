#include "ktf/dof.hpp"
#include "ktf/experiments.hpp"
#include "ktf/gridfile.hpp"
#include "ktf/interp.hpp"
#include "ktf/penalty.hpp"
#include "ktf/solvers.hpp"
#include "ktf/spectral.hpp"
#include "ktf/threading.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using json = nlohmann::json;
using namespace ktf;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitNoConverge = 3;

struct CommonFitFlags {
    std::string solver = "admm-type1";
    double rho0 = -1.0;
    bool no_adaptive = false;
    double tol_abs = 1e-6;
    double tol_rel = 1e-6;
    int max_iters = 5000;
    int threads = default_threads();
    int splitting_iters = 500;
    double ref_tol = 1e-8;
};

AdmmConfig make_config(const CommonFitFlags& f, int k) {
    AdmmConfig cfg;
    if (f.solver.rfind("admm-", 0) == 0) cfg.j = split_index_for(f.solver, k);
    cfg.rho0 = f.rho0;
    cfg.adaptive = !f.no_adaptive;
    cfg.eps_abs = f.tol_abs;
    cfg.eps_rel = f.tol_rel;
    cfg.max_iters = f.max_iters;
    cfg.threads = f.threads;
    return cfg;
}

void add_fit_flags(CLI::App* cmd, CommonFitFlags& f) {
    cmd->add_option("--solver", f.solver)
        ->check(CLI::IsMember({"admm-type0", "admm-type1", "admm-type2", "admm-soft", "dykstra",
                               "dr", "dual-ref"}));
    cmd->add_option("--rho0", f.rho0);
    cmd->add_flag("--no-adaptive-rho", f.no_adaptive);
    cmd->add_option("--tol-abs", f.tol_abs);
    cmd->add_option("--tol-rel", f.tol_rel);
    cmd->add_option("--max-iters", f.max_iters);
    cmd->add_option("--threads", f.threads);
    cmd->add_option("--splitting-iters", f.splitting_iters,
                    "cycle/iteration budget for dykstra and dr");
    cmd->add_option("--ref-tol", f.ref_tol, "relative duality gap for dual-ref");
}

std::vector<double> parse_lambda_grid(const std::string& spec) {
    double lo = 0, hi = 0;
    int count = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(spec);
    if (!(ss >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1 ||
        !(lo > 0) || hi < lo)
        throw CLI::ValidationError("--lambda-grid", "expected min:max:count with 0 < min <= max");
    std::vector<double> g(static_cast<size_t>(count));
    if (count == 1) {
        g[0] = hi;
        return g;
    }
    for (int i = 0; i < count; ++i)
        g[static_cast<size_t>(i)] =
            std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
    return g;
}

double sse(const GridSignal& a, const GridSignal& b) {
    double s = 0;
    for (Index i = 0; i < a.n(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename into place: " + path);
}

// ---------------------------------------------------------------- fit

int cmd_fit(const std::string& input, const std::string& format, const std::string& output,
            int k, double lambda, const std::string& lambda_grid, const std::string& report_path,
            const CommonFitFlags& flags) {
    const GridSignal y = read_grid(input, format);
    const KroneckerPenalty penalty = KroneckerPenalty::for_ktf(y.shape, k);
    const double sigma_hat = estimate_sigma_mad(y);

    std::vector<double> lambdas;
    if (!lambda_grid.empty())
        lambdas = parse_lambda_grid(lambda_grid);
    else
        lambdas = {lambda};

    json report;
    report["schema"] = "ktf-fit-report-v1";
    report["k"] = k;
    report["solver"] = flags.solver;
    report["n"] = y.n();
    report["dims"] = y.shape.dims;
    report["sigma_hat"] = sigma_hat;
    report["fits"] = json::array();

    bool all_converged = true;
    AdmmState warm;  // lambda grid fits run warm-started, largest lambda first
    std::vector<size_t> order(lambdas.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return lambdas[a] > lambdas[b]; });

    std::vector<json> fit_entries(lambdas.size());
    std::vector<GridSignal> fits(lambdas.size());
    const bool is_admm = flags.solver.rfind("admm-", 0) == 0;
    for (size_t oi = 0; oi < order.size(); ++oi) {
        const size_t li = order[oi];
        const double lam = lambdas[li];
        FitResult fr;
        if (is_admm) {
            fr = ktf_admm(y, k, lam, make_config(flags, k), &warm);
        } else {
            AdmmConfig base = make_config(flags, k);
            fr = solve_named(flags.solver, y, k, lam, base, flags.splitting_iters, flags.ref_tol);
        }
        all_converged = all_converged && fr.converged;

        json e;
        e["lambda"] = lam;
        e["objective"] = fr.objective;
        e["iterations"] = fr.iters;
        e["converged"] = fr.converged;
        const double kv = penalty.ktv(fr.theta);
        e["ktv"] = kv;
        const Index df = dof_estimate(fr.theta, k);
        e["dof"] = df;
        // SURE-style risk proxy ||y-th||^2 + 2 sigma^2 df - n sigma^2
        e["sure"] = sse(y, fr.theta) + 2.0 * sigma_hat * sigma_hat * static_cast<double>(df) -
                    static_cast<double>(y.n()) * sigma_hat * sigma_hat;
        e["primal_residuals"] = fr.primal_residuals;
        e["dual_residuals"] = fr.dual_residuals;
        fit_entries[li] = std::move(e);
        fits[li] = std::move(fr.theta);
    }

    if (lambdas.size() == 1) {
        write_grid(output, fits[0], format == "pgm" ? "pgm" : format);
    } else {
        char suffix[16];
        for (size_t li = 0; li < lambdas.size(); ++li) {
            std::snprintf(suffix, sizeof suffix, ".%03zu", li);
            write_grid(output + suffix, fits[li], format == "pgm" ? "pgm" : format);
            fit_entries[li]["output"] = output + suffix;
        }
    }
    for (auto& e : fit_entries) report["fits"].push_back(std::move(e));
    write_text_atomic(report_path.empty() ? output + ".json" : report_path, report.dump(2) + "\n");
    return all_converged ? 0 : kExitNoConverge;
}

// ---------------------------------------------------------------- interpolate

int cmd_interpolate(const std::string& input, const std::string& format, int k,
                    const std::string& queries, const std::string& output) {
    const GridSignal theta = read_grid(input, format);
    const int d = theta.shape.d();

    std::ifstream qf(queries);
    if (!qf) throw std::runtime_error("cannot open query file: " + queries);
    std::ostringstream out;
    for (int j = 1; j <= d; ++j) out << (j > 1 ? "," : "") << "x" << j;
    out << ",value\n";
    char buf[64];
    std::string line;
    while (std::getline(qf, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ss(line);
        std::vector<double> x(static_cast<size_t>(d));
        for (int j = 0; j < d; ++j) {
            if (!(ss >> x[static_cast<size_t>(j)]))
                throw std::runtime_error("query row with fewer than d coordinates");
        }
        double extra;
        if (ss >> extra) throw std::runtime_error("query row with more than d coordinates");
        const double v = interpolate(theta, x, k);
        for (int j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", x[static_cast<size_t>(j)]);
            out << (j > 0 ? "," : "") << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf << '\n';
    }
    write_text_atomic(output, out.str());
    return 0;
}

// ---------------------------------------------------------------- rates

struct RatesSetup {
    std::string experiment;
    int k = 0;
    int d = 2;
    double sigma = 1.0;
};

GridSignal make_truth(const RatesSetup& s, int N) {
    std::vector<int> dims(static_cast<size_t>(s.d), N);
    const auto shape = LatticeShape::make_uniform(dims);
    if (s.experiment == "one-hot") return gen_one_hot(shape);
    if (s.experiment == "spike") return gen_spike(shape);
    if (s.experiment == "linear") return gen_linear(shape, s.k);
    if (s.experiment == "two-peak-demo") return gen_two_peak(N);
    throw std::invalid_argument("unknown experiment: " + s.experiment);
}

std::vector<double> integer_grid(int N, int count) {
    std::vector<double> g;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        const int tau = std::max(1, static_cast<int>(std::llround(std::pow(N, t))));
        if (g.empty() || static_cast<int>(g.back()) != tau) g.push_back(tau);
    }
    return g;
}

int cmd_rates(const RatesSetup& setup, const std::vector<int>& sizes, int reps,
              std::uint64_t seed, const std::string& prefix, const CommonFitFlags& flags,
              int grid_size) {
    std::ostringstream curve, best;
    curve << "experiment,method,n,N,tuning,mse_mean,mse_sd,reps_ok,failures\n";
    best << "method,n,best_mse,sd,tuning\n";
    RateTable table;
    char buf[64];

    for (int N : sizes) {
        const GridSignal truth = make_truth(setup, N);
        const Index n = truth.n();
        const GridSignal y0 = add_noise(truth, setup.sigma, seed);  // anchors the lambda grid
        const double lmax = lambda_max(y0, setup.k, 1e-7);

        std::vector<TuningMethod> methods;

        TuningMethod ktfm;
        ktfm.name = "ktf";
        ktfm.grid = geometric_grid(std::max(lmax, 1e-12), 1e-3, 1.0, grid_size);
        const int k = setup.k;
        CommonFitFlags f = flags;
        if (f.solver.rfind("admm-", 0) != 0) f.solver = "admm-type1";
        ktfm.fit = [f, k](const GridSignal& y, double lam) {
            return ktf_admm(y, k, lam, make_config(f, k)).theta;
        };
        methods.push_back(std::move(ktfm));

        TuningMethod eig;
        eig.name = "eigenmaps";
        eig.grid = integer_grid(N, std::min(grid_size, N));
        eig.fit = [k](const GridSignal& y, double tau) {
            return eigenmaps_fit_box(y, k, static_cast<int>(tau));
        };
        methods.push_back(std::move(eig));

        if (setup.experiment == "two-peak-demo") {
            TuningMethod lap;
            lap.name = "laplacian-l2";
            lap.grid = geometric_grid(1.0, 1e-4, 1e4, grid_size);
            lap.fit = [](const GridSignal& y, double g) { return laplacian_smoother(y, 2, g); };
            methods.push_back(std::move(lap));

            TuningMethod ker;
            ker.name = "kernel";
            ker.grid = geometric_grid(0.5, 1.0 / N, 1.0, grid_size);
            ker.fit = [](const GridSignal& y, double bw) { return kernel_smoother(y, bw); };
            methods.push_back(std::move(ker));
        }

        for (const TuningMethod& m : methods) {
            const TuningCurve c = tuning_curve(truth, setup.sigma, m, reps, seed, flags.threads);
            for (const TuningCurvePoint& pt : c.points) {
                std::snprintf(buf, sizeof buf, "%.17g", pt.tuning);
                curve << setup.experiment << ',' << m.name << ',' << n << ',' << N << ',' << buf;
                std::snprintf(buf, sizeof buf, "%.17g", pt.mse_mean);
                curve << ',' << buf;
                std::snprintf(buf, sizeof buf, "%.17g", pt.mse_sd);
                curve << ',' << buf << ',' << pt.reps_ok << ',' << pt.failures << '\n';
            }
            const TuningCurvePoint& b = c.best();
            RateRow row{n, m.name, b.mse_mean, b.mse_sd, b.tuning};
            table.push_back(row);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", b.mse_mean, b.mse_sd, b.tuning);
            best << m.name << ',' << n << ',' << buf << '\n';
        }
    }

    json slopes;
    slopes["experiment"] = setup.experiment;
    slopes["k"] = setup.k;
    slopes["d"] = setup.d;
    slopes["sigma"] = setup.sigma;
    slopes["methods"] = json::object();
    std::vector<std::string> names;
    for (const RateRow& r : table)
        if (std::find(names.begin(), names.end(), r.method) == names.end())
            names.push_back(r.method);
    for (const std::string& name : names) {
        json m;
        if (sizes.size() >= 3) {
            const SlopeFit sf = rate_slope(table, name);
            m["slope"] = sf.slope;
            m["stderr"] = sf.stderr_;
        }
        json bests = json::array();
        for (const RateRow& r : table)
            if (r.method == name) bests.push_back({{"n", r.n}, {"best_mse", r.best_mse}});
        m["best"] = bests;
        slopes["methods"][name] = m;
    }

    write_text_atomic(prefix + "_curve.csv", curve.str());
    write_text_atomic(prefix + "_best.csv", best.str());
    write_text_atomic(prefix + "_slopes.json", slopes.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const std::vector<std::string>& solvers, const std::vector<int>& sizes, int k,
              double lambda_frac, std::uint64_t seed, const std::string& output,
              const CommonFitFlags& flags) {
    std::ostringstream out, summary;
    out << "solver,n,iter,time_s,subopt_rel\n";
    summary << "solver,n,time_to_1e-2_s,iters_run\n";
    char buf[64];

    for (int N : sizes) {
        const GridSignal truth = gen_two_peak(N);
        const GridSignal y = add_noise(truth, noise_sigma_for_snr(truth, 0.5), seed);
        const double lambda = lambda_frac * lambda_max(y, k, 1e-6);

        // trusted optimum for the suboptimality traces
        const FitResult ref = dual_reference_solve(y, k, lambda, 1e-9, 400000);
        const double fstar = ref.objective;

        for (const std::string& solver : solvers) {
            if (solver == "dr" && k > 1) {
                // per-line interior point cost explodes for high orders; still allowed
            }
            struct Sample {
                int iter;
                double t, subopt;
            };
            std::vector<Sample> samples;
            const auto t0 = std::chrono::steady_clock::now();
            double hook_cost = 0.0;
            const auto hook = [&](int iter, const GridSignal& th) {
                const auto in = std::chrono::steady_clock::now();
                const double elapsed = std::chrono::duration<double>(in - t0).count() - hook_cost;
                const double sub = (objective(y, th, k, lambda) - fstar) / std::abs(fstar);
                samples.push_back({iter, elapsed, sub});
                hook_cost += std::chrono::duration<double>(std::chrono::steady_clock::now() - in)
                                 .count();
            };
            CommonFitFlags f = flags;
            f.solver = solver;
            AdmmConfig cfg = make_config(f, k);
            cfg.eps_abs = 1e-12;
            cfg.eps_rel = 1e-12;  // run the full budget; traces do the talking
            cfg.max_iters = flags.max_iters;
            cfg.want_dual = false;
            cfg.iter_hook = hook;
            solve_named(solver, y, k, lambda, cfg, flags.splitting_iters, 1e-10);

            double reach = -1;
            for (const Sample& s : samples) {
                std::snprintf(buf, sizeof buf, "%.6f,%.6e", s.t, s.subopt);
                out << solver << ',' << y.n() << ',' << s.iter << ',' << buf << '\n';
                if (reach < 0 && s.subopt <= 1e-2) reach = s.t;
            }
            std::snprintf(buf, sizeof buf, "%.6f", reach);
            summary << solver << ',' << y.n() << ',' << (reach < 0 ? "-" : buf) << ','
                    << (samples.empty() ? 0 : samples.back().iter) << '\n';
        }
    }
    write_text_atomic(output, out.str());
    write_text_atomic(output + ".summary.csv", summary.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kronecker trend filtering on d-dimensional lattices"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "solve the penalized least-squares problem");
    std::string in, out_path, fmt = "bin", lambda_grid, report_path, queries;
    int k = 0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    CommonFitFlags flags;
    fit->add_option("--input", in)->required();
    fit->add_option("--output", out_path)->required();
    fit->add_option("--format", fmt)->check(CLI::IsMember({"bin", "csv", "pgm"}));
    fit->add_option("--k", k);
    fit->add_option("--lambda", lambda);
    fit->add_option("--lambda-grid", lambda_grid, "min:max:count (geometric)");
    fit->add_option("--report", report_path);
    fit->add_option("--seed", seed);
    add_fit_flags(fit, flags);

    // interpolate
    auto* interp = app.add_subcommand("interpolate", "evaluate the discrete-spline extension");
    interp->add_option("--input", in)->required();
    interp->add_option("--format", fmt)->check(CLI::IsMember({"bin", "csv", "pgm"}));
    interp->add_option("--k", k);
    interp->add_option("--queries", queries)->required();
    interp->add_option("--output", out_path)->required();

    // ktv
    auto* ktv_cmd = app.add_subcommand("ktv", "print the Kronecker total variation of a grid");
    ktv_cmd->add_option("--input", in)->required();
    ktv_cmd->add_option("--format", fmt)->check(CLI::IsMember({"bin", "csv", "pgm"}));
    ktv_cmd->add_option("--k", k);

    // rates
    auto* rates = app.add_subcommand("rates", "desk-scale error-rate experiments");
    RatesSetup setup;
    std::vector<int> sizes;
    int reps = 20, grid_size = 20;
    std::string prefix;
    bool sigma_given = false, d_given = false, k_given = false;
    rates->add_option("--experiment", setup.experiment)
        ->required()
        ->check(CLI::IsMember({"one-hot", "spike", "linear", "two-peak-demo"}));
    rates->add_option("--sizes", sizes, "per-axis side lengths N")->required()->delimiter(',');
    rates->add_option("--k", setup.k)->each([&](const std::string&) { k_given = true; });
    rates->add_option("--d", setup.d)->each([&](const std::string&) { d_given = true; });
    rates->add_option("--sigma", setup.sigma)->each([&](const std::string&) { sigma_given = true; });
    rates->add_option("--reps", reps);
    rates->add_option("--seed", seed);
    rates->add_option("--grid-size", grid_size);
    rates->add_option("--output-prefix", prefix)->required();
    CommonFitFlags rates_flags;
    rates_flags.tol_abs = 1e-5;
    rates_flags.tol_rel = 1e-5;
    add_fit_flags(rates, rates_flags);

    // bench
    auto* bench = app.add_subcommand("bench", "solver suboptimality and wall-time traces");
    std::vector<std::string> bench_solvers{"admm-type0", "admm-type1", "admm-type2", "admm-soft",
                                           "dual-ref"};
    double lambda_frac = 0.3;
    bench->add_option("--solvers", bench_solvers)->delimiter(',');
    bench->add_option("--sizes", sizes, "per-axis side lengths N (d=2)")->required()->delimiter(',');
    bench->add_option("--k", k);
    bench->add_option("--lambda-frac", lambda_frac, "lambda as a fraction of lambda_max");
    bench->add_option("--seed", seed);
    bench->add_option("--output", out_path)->required();
    CommonFitFlags bench_flags;
    bench_flags.max_iters = 2000;
    add_fit_flags(bench, bench_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    try {
        if (fit->parsed()) {
            if (!lambda_grid.empty() && fit->count("--lambda"))
                throw std::invalid_argument("give either --lambda or --lambda-grid");
            return cmd_fit(in, fmt, out_path, k, lambda, lambda_grid, report_path, flags);
        }
        if (interp->parsed()) return cmd_interpolate(in, fmt, k, queries, out_path);
        if (ktv_cmd->parsed()) {
            const GridSignal g = read_grid(in, fmt);
            std::printf("%.17g\n", KroneckerPenalty::for_ktf(g.shape, k).ktv(g));
            return 0;
        }
        if (rates->parsed()) {
            if (!d_given) setup.d = setup.experiment == "spike" ? 4 : 2;
            if (!k_given) setup.k = setup.experiment == "spike" ? 1 : 0;
            if (!sigma_given) {
                if (setup.experiment == "linear")
                    setup.sigma = 0.2;
                else if (setup.experiment == "two-peak-demo")
                    setup.sigma = -1;  // resolved per size from SNR 0.5 below
                else
                    setup.sigma = 1.0;
            }
            if (setup.sigma < 0) {
                // two-peak demo: SNR 0.5 against the size-specific truth
                // handled by resolving sigma per size inside cmd_rates is
                // overkill; the signal variance is nearly size-free, use N0
                setup.sigma = noise_sigma_for_snr(make_truth(setup, sizes.front()), 0.5);
            }
            return cmd_rates(setup, sizes, reps, seed, prefix, rates_flags, grid_size);
        }
        if (bench->parsed())
            return cmd_bench(bench_solvers, sizes, k, lambda_frac, seed, out_path, bench_flags);
    } catch (const std::invalid_argument& e) {
        std::cerr << "ktf: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "ktf: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
