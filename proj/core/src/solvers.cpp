#include "ktf/solvers.hpp"

#include "ktf/dct.hpp"
#include "ktf/spectral.hpp"
#include "ktf/threading.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <stdexcept>

namespace ktf {

namespace {

double nrm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double nrm2(const GridSignal& g) { return nrm2(g.values); }

double inf_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

struct LineTask {
    int block = 0;
    Index base = 0, stride = 0;
    int count = 0;
    Index rbase = 0, rstride = 0;
};

std::vector<LineTask> collect_lines(const PenaltySplit& split) {
    std::vector<LineTask> tasks;
    for (int l = 0; l < split.shape.d(); ++l) {
        const LatticeShape& bs = split.block_shapes[static_cast<size_t>(l)];
        if (bs.n() == 0) continue;
        const Diff1d& D = split.outer_ops[static_cast<size_t>(l)];
        for_each_line_reduced(bs, l + 1, std::max(D.rows(), 0),
                              [&](Index base, Index stride, int count, Index rbase, Index rstride) {
                                  tasks.push_back(LineTask{l, base, stride, count, rbase, rstride});
                              });
    }
    return tasks;
}

/// prox of c * ||D^(k+1) . ||_1 per line along `axis`, on the full lattice.
/// Used by Dykstra and Douglas-Rachford.
GridSignal axis_prox(const GridSignal& w, int axis, int order, double c, double inner_tol,
                     int threads) {
    GridSignal out = w;
    struct Task {
        Index base, stride;
        int count;
    };
    std::vector<Task> tasks;
    for_each_line(w.shape, axis, [&](Index base, Index stride, int count) {
        tasks.push_back(Task{base, stride, count});
    });
    const std::vector<double>& design = w.shape.designs[static_cast<size_t>(axis - 1)];
    const bool uniform = w.shape.uniform;
    parallel_for(static_cast<long long>(tasks.size()), threads, [&](long long ti) {
        const Task& t = tasks[static_cast<size_t>(ti)];
        std::vector<double> line(static_cast<size_t>(t.count));
        for (int i = 0; i < t.count; ++i) line[static_cast<size_t>(i)] = w[t.base + i * t.stride];
        std::vector<double> sol;
        if (order == 1) {
            sol = tv1d_dp(line, c);
        } else {
            TF1dProblem prob;
            prob.y = std::move(line);
            prob.lambda = c;
            prob.order = order;
            if (!uniform) prob.design = design;
            sol = tf1d_pdip_full(prob, inner_tol).theta;
        }
        for (int i = 0; i < t.count; ++i) out[t.base + i * t.stride] = sol[static_cast<size_t>(i)];
    });
    return out;
}

}  // namespace

double objective(const GridSignal& y, const GridSignal& theta, int k, double lambda) {
    if (!(y.shape == theta.shape)) throw std::invalid_argument("objective: shape mismatch");
    double fid = 0.0;
    for (Index i = 0; i < y.n(); ++i) {
        const double r = y[i] - theta[i];
        fid += r * r;
    }
    const KroneckerPenalty pen = KroneckerPenalty::for_ktf(y.shape, k);
    return 0.5 * fid + lambda * pen.ktv(theta);
}

GridSignal theta_update_dct(const GridSignal& rhs, double rho) {
    DctSolver solver(rhs.shape);
    return solver.solve(rhs, rho, 1);
}

GridSignal theta_update_cg(const GridSignal& rhs, double rho, const KroneckerPenalty& inner,
                           double tol, int* iters_out, int max_iters) {
    if (rho == 0.0) {
        if (iters_out) *iters_out = 0;
        return rhs;
    }
    const Index n = rhs.n();
    if (max_iters <= 0) max_iters = static_cast<int>(std::min<Index>(10 * n + 50, 200000));

    const double bnorm = nrm2(rhs);
    if (bnorm == 0) {
        if (iters_out) *iters_out = 0;
        return GridSignal::zeros(rhs.shape);
    }

    GridSignal x = rhs;
    GridSignal r = GridSignal::zeros(rhs.shape);
    GridSignal p = GridSignal::zeros(rhs.shape);
    GridSignal Ap = GridSignal::zeros(rhs.shape);
    std::vector<double> w;

    auto apply_A = [&](const GridSignal& v, GridSignal& out) {
        inner.apply(v, w);
        for (double& c : w) c *= rho;
        out.values = v.values;
        inner.apply_transpose_add(w, out);
    };

    apply_A(x, Ap);
    for (Index i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];
    p.values = r.values;
    double rs = 0.0;
    for (double v : r.values) rs += v * v;

    int it = 0;
    for (; it < max_iters; ++it) {
        if (std::sqrt(rs) <= tol * bnorm) break;
        apply_A(p, Ap);
        double pAp = 0.0;
        for (Index i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        const double alpha = rs / pAp;
        for (Index i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rs_new = 0.0;
        for (double v : r.values) rs_new += v * v;
        const double beta = rs_new / rs;
        rs = rs_new;
        for (Index i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    if (std::sqrt(rs) > tol * bnorm)
        throw std::runtime_error("theta_update_cg: iteration cap exceeded");
    if (iters_out) *iters_out = it;
    return x;
}

std::vector<double> z_update(const std::vector<double>& w, const PenaltySplit& split,
                             double lambda_over_rho, double tol, int threads,
                             std::vector<double>* dual_out, bool* inner_ok) {
    if (static_cast<Index>(w.size()) != split.inner_rows)
        throw std::invalid_argument("z_update: layout mismatch");
    std::vector<double> z = w;
    if (dual_out) dual_out->assign(static_cast<size_t>(split.outer_rows), 0.0);
    if (inner_ok) *inner_ok = true;

    if (split.outer_order == 0) {
        soft_threshold_inplace(z.data(), static_cast<Index>(z.size()), lambda_over_rho);
        if (dual_out)
            for (size_t i = 0; i < z.size(); ++i) (*dual_out)[i] = w[i] - z[i];
        return z;
    }

    const auto tasks = collect_lines(split);
    std::atomic<bool> ok{true};
    parallel_for(static_cast<long long>(tasks.size()), threads, [&](long long ti) {
        const LineTask& task = tasks[static_cast<size_t>(ti)];
        const Diff1d& D = split.outer_ops[static_cast<size_t>(task.block)];
        const double* src = w.data() + split.block_off[static_cast<size_t>(task.block)] + task.base;
        double* dst = z.data() + split.block_off[static_cast<size_t>(task.block)] + task.base;

        std::vector<double> line(static_cast<size_t>(task.count));
        for (int t = 0; t < task.count; ++t) line[static_cast<size_t>(t)] = src[t * task.stride];

        std::vector<double> sol;
        if (split.outer_order == 1) {
            sol = tv1d_dp(line, lambda_over_rho);
        } else {
            TF1dProblem prob;
            prob.y = line;
            prob.lambda = lambda_over_rho;
            prob.order = split.outer_order;
            if (!split.block_shapes[static_cast<size_t>(task.block)].uniform)
                prob.design = D.design;
            PdipResult pr = tf1d_pdip_full(prob, tol);
            if (!pr.converged) ok.store(false, std::memory_order_relaxed);
            sol = std::move(pr.theta);
        }
        for (int t = 0; t < task.count; ++t) dst[t * task.stride] = sol[static_cast<size_t>(t)];

        if (dual_out && D.rows() > 0) {
            std::vector<double> resid(static_cast<size_t>(task.count));
            for (int t = 0; t < task.count; ++t)
                resid[static_cast<size_t>(t)] =
                    line[static_cast<size_t>(t)] - sol[static_cast<size_t>(t)];
            const std::vector<double> eta = dual_from_residual(D, resid.data(), 1);
            double* od = dual_out->data() + split.outer_block_off[static_cast<size_t>(task.block)] +
                         task.rbase;
            for (int r = 0; r < D.rows(); ++r) od[r * task.rstride] = eta[static_cast<size_t>(r)];
        }
    });
    if (inner_ok) *inner_ok = ok.load();
    return z;
}

FitResult ktf_admm(const GridSignal& y, int k, double lambda, const AdmmConfig& config,
                   AdmmState* warm) {
    if (lambda < 0) throw std::invalid_argument("ktf_admm: negative lambda");
    const KroneckerPenalty penalty = KroneckerPenalty::for_ktf(y.shape, k);

    FitResult res;
    if (lambda == 0.0) {
        res.theta = y;
        res.objective = objective(y, y, k, lambda);
        if (config.want_dual)
            res.dual_u = std::vector<double>(static_cast<size_t>(penalty.rows()), 0.0);
        return res;
    }
    if (config.j >= 1 && !y.shape.uniform)
        throw std::invalid_argument("ktf_admm: splits with j >= 1 need a uniform lattice");

    const PenaltySplit split = decompose(penalty, config.j);
    const Index n = y.n();
    const Index p = split.inner_rows;
    const int d = y.shape.d();

    double rho = config.rho0 > 0 ? config.rho0 : std::max(lambda, 1e-3);

    std::unique_ptr<DctSolver> dct;
    if (config.j == 1 && y.shape.uniform) dct = std::make_unique<DctSolver>(y.shape);

    GridSignal theta = y;
    std::vector<double> z = split.inner_apply(theta);
    std::vector<double> u(static_cast<size_t>(p), 0.0);
    if (warm && warm->valid && warm->theta.shape == y.shape &&
        static_cast<Index>(warm->z.size()) == p) {
        theta = warm->theta;
        z = warm->z;
        u = warm->u;
        if (warm->rho > 0) rho = warm->rho;
    }
    std::vector<double> dtheta = z, rhs_vec(static_cast<size_t>(p)), w(static_cast<size_t>(p));
    GridSignal rhs = GridSignal::zeros(y.shape);

    bool inner_all_ok = true;
    res.converged = false;

    int it = 0;
    while (it < config.max_iters) {
        ++it;
        // theta-update: (I + rho D^(j)T D^(j)) theta = y + rho D^(j)T (z + u)
        for (Index i = 0; i < p; ++i)
            rhs_vec[static_cast<size_t>(i)] =
                rho * (z[static_cast<size_t>(i)] + u[static_cast<size_t>(i)]);
        if (config.j == 0) {
            for (Index i = 0; i < n; ++i) {
                double acc = y[i];
                for (int l = 0; l < d; ++l)
                    acc += rhs_vec[static_cast<size_t>(split.block_off[static_cast<size_t>(l)] + i)];
                theta[i] = acc / (1.0 + rho * d);
            }
        } else {
            rhs.values = y.values;
            split.inner->apply_transpose_add(rhs_vec, rhs);
            if (dct) {
                theta = dct->solve(rhs, rho, 1);
            } else {
                theta = theta_update_cg(rhs, rho, *split.inner, config.cg_tol);
            }
        }

        dtheta = split.inner_apply(theta);
        for (Index i = 0; i < p; ++i)
            w[static_cast<size_t>(i)] = dtheta[static_cast<size_t>(i)] - u[static_cast<size_t>(i)];
        bool ok = true;
        std::vector<double> z_new =
            z_update(w, split, lambda / rho, config.inner_tol, config.threads, nullptr, &ok);
        inner_all_ok = inner_all_ok && ok;

        double rnorm = 0.0;
        for (Index i = 0; i < p; ++i) {
            const double r = z_new[static_cast<size_t>(i)] - dtheta[static_cast<size_t>(i)];
            rnorm += r * r;
        }
        rnorm = std::sqrt(rnorm);
        std::vector<double> dz(static_cast<size_t>(p));
        for (Index i = 0; i < p; ++i)
            dz[static_cast<size_t>(i)] =
                rho * (z_new[static_cast<size_t>(i)] - z[static_cast<size_t>(i)]);
        const double snorm = nrm2(split.inner_apply_transpose(dz).values);

        z = std::move(z_new);
        for (Index i = 0; i < p; ++i)
            u[static_cast<size_t>(i)] += z[static_cast<size_t>(i)] - dtheta[static_cast<size_t>(i)];

        res.primal_residuals.push_back(rnorm);
        res.dual_residuals.push_back(snorm);
        if (config.iter_hook) config.iter_hook(it, theta);

        std::vector<double> ru(static_cast<size_t>(p));
        for (Index i = 0; i < p; ++i) ru[static_cast<size_t>(i)] = rho * u[static_cast<size_t>(i)];
        const double eps_pri = std::sqrt(static_cast<double>(p)) * config.eps_abs +
                               config.eps_rel * std::max(nrm2(dtheta), nrm2(z));
        const double eps_dual = std::sqrt(static_cast<double>(n)) * config.eps_abs +
                                config.eps_rel * nrm2(split.inner_apply_transpose(ru).values);
        if (rnorm <= eps_pri && snorm <= eps_dual) {
            res.converged = true;
            break;
        }

        if (config.adaptive) {
            if (rnorm > config.mu * snorm) {
                rho *= config.tau;
                for (double& v : u) v /= config.tau;
            } else if (snorm > config.mu * rnorm) {
                rho /= config.tau;
                for (double& v : u) v *= config.tau;
            }
        }
    }

    res.iters = it;
    res.converged = res.converged && inner_all_ok;
    res.theta = theta;
    res.objective = objective(y, theta, k, lambda);
    if (warm) {
        warm->theta = theta;
        warm->z = z;
        warm->u = u;
        warm->rho = rho;
        warm->valid = true;
    }

    if (config.want_dual) {
        dtheta = split.inner_apply(theta);
        for (Index i = 0; i < p; ++i)
            w[static_cast<size_t>(i)] = dtheta[static_cast<size_t>(i)] - u[static_cast<size_t>(i)];
        std::vector<double> eta;
        z_update(w, split, lambda / rho, config.inner_tol, config.threads, &eta, nullptr);
        for (double& v : eta) v *= rho;
        res.dual_u = std::move(eta);
    }
    return res;
}

double lambda_max(const GridSignal& y, int k, double tol, int max_iters) {
    const KroneckerPenalty penalty = KroneckerPenalty::for_ktf(y.shape, k);
    const Index m = penalty.rows();
    if (m == 0) return 0.0;
    const double step = 1.0 / gram_operator_norm(penalty);

    std::vector<double> u(static_cast<size_t>(m), 0.0), u_prev = u, v = u, grad;
    GridSignal dtu = GridSignal::zeros(y.shape);
    double tk = 1.0;
    const double gd0 = nrm2(penalty.apply(y));
    if (gd0 == 0) return 0.0;

    for (int it = 0; it < max_iters; ++it) {
        dtu = penalty.apply_transpose(v);
        for (Index i = 0; i < y.n(); ++i) dtu[i] -= y[i];
        grad = penalty.apply(dtu);
        if (nrm2(grad) <= tol * gd0) break;
        u_prev = u;
        for (Index i = 0; i < m; ++i)
            u[static_cast<size_t>(i)] =
                v[static_cast<size_t>(i)] - step * grad[static_cast<size_t>(i)];
        const double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        for (Index i = 0; i < m; ++i)
            v[static_cast<size_t>(i)] =
                u[static_cast<size_t>(i)] +
                ((tk - 1.0) / tnext) * (u[static_cast<size_t>(i)] - u_prev[static_cast<size_t>(i)]);
        tk = tnext;
    }
    return inf_norm(u);
}

FitResult dual_reference_solve(const GridSignal& y, int k, double lambda, double tol,
                               int max_iters, const IterHook& hook) {
    const KroneckerPenalty penalty = KroneckerPenalty::for_ktf(y.shape, k);
    const Index m = penalty.rows();

    FitResult res;
    if (lambda == 0.0 || m == 0) {
        res.theta = y;
        res.objective = objective(y, y, k, lambda);
        res.dual_u = std::vector<double>(static_cast<size_t>(m), 0.0);
        return res;
    }

    const double step = 1.0 / gram_operator_norm(penalty);

    std::vector<double> u(static_cast<size_t>(m), 0.0), u_prev = u, v = u, grad;
    GridSignal dtu = GridSignal::zeros(y.shape);
    GridSignal theta = y;
    double tk = 1.0;
    double fprev = std::numeric_limits<double>::infinity();
    res.converged = false;

    int it = 0;
    for (; it < max_iters; ++it) {
        dtu = penalty.apply_transpose(v);
        for (Index i = 0; i < y.n(); ++i) dtu[i] -= y[i];
        grad = penalty.apply(dtu);
        u_prev = u;
        for (Index i = 0; i < m; ++i)
            u[static_cast<size_t>(i)] = std::clamp(
                v[static_cast<size_t>(i)] - step * grad[static_cast<size_t>(i)], -lambda, lambda);
        const double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        for (Index i = 0; i < m; ++i)
            v[static_cast<size_t>(i)] =
                u[static_cast<size_t>(i)] +
                ((tk - 1.0) / tnext) * (u[static_cast<size_t>(i)] - u_prev[static_cast<size_t>(i)]);
        tk = tnext;

        if ((it & 15) == 0 || it == max_iters - 1) {
            dtu = penalty.apply_transpose(u);
            double dual_val = 0.0;
            for (Index i = 0; i < y.n(); ++i) {
                theta[i] = y[i] - dtu[i];
                dual_val += y[i] * dtu[i] - 0.5 * dtu[i] * dtu[i];
            }
            const double primal = objective(y, theta, k, lambda);
            const double gap = primal - dual_val;
            res.primal_residuals.push_back(gap);
            if (hook) hook(it + 1, theta);
            if (gap <= tol * std::max(1.0, primal)) {
                res.converged = true;
                ++it;
                break;
            }
            const double fval = -dual_val;
            if (fval > fprev) {  // function-value restart
                tk = 1.0;
                v = u;
            }
            fprev = fval;
        }
    }

    dtu = penalty.apply_transpose(u);
    for (Index i = 0; i < y.n(); ++i) theta[i] = y[i] - dtu[i];
    res.theta = theta;
    res.objective = objective(y, theta, k, lambda);
    res.iters = it;
    res.dual_u = std::move(u);
    return res;
}

FitResult prox_dykstra(const GridSignal& y, int k, double lambda, int iters, double inner_tol,
                       int threads, const IterHook& hook) {
    if (!y.shape.uniform) throw std::invalid_argument("prox_dykstra: uniform lattice required");
    const int d = y.shape.d();
    const int order = k + 1;

    GridSignal theta = y;
    std::vector<GridSignal> corr(static_cast<size_t>(d), GridSignal::zeros(y.shape));

    FitResult res;
    for (int cycle = 0; cycle < iters; ++cycle) {
        for (int axis = 1; axis <= d; ++axis) {
            GridSignal w = theta;
            const GridSignal& zc = corr[static_cast<size_t>(axis - 1)];
            for (Index i = 0; i < w.n(); ++i) w[i] += zc[i];
            GridSignal prox = axis_prox(w, axis, order, lambda, inner_tol, threads);
            for (Index i = 0; i < w.n(); ++i) corr[static_cast<size_t>(axis - 1)][i] = w[i] - prox[i];
            theta = std::move(prox);
        }
        if (hook) hook(cycle + 1, theta);
    }
    res.theta = theta;
    res.objective = objective(y, theta, k, lambda);
    res.iters = iters;
    return res;
}

FitResult douglas_rachford(const GridSignal& y, int k, double lambda, int iters, double inner_tol,
                           int threads, const IterHook& hook) {
    if (y.shape.d() != 2) throw std::invalid_argument("douglas_rachford: d = 2 only");
    if (!y.shape.uniform) throw std::invalid_argument("douglas_rachford: uniform lattice required");
    const int order = k + 1;

    GridSignal zeta = y;
    GridSignal theta = y;
    for (int it = 0; it < iters; ++it) {
        // prox of f = 0.5||y - .||^2 + lambda R_1 at zeta
        GridSignal mid = zeta;
        for (Index i = 0; i < mid.n(); ++i) mid[i] = 0.5 * (y[i] + zeta[i]);
        theta = axis_prox(mid, 1, order, 0.5 * lambda, inner_tol, threads);
        // reflected prox of g = lambda R_2
        GridSignal refl = zeta;
        for (Index i = 0; i < refl.n(); ++i) refl[i] = 2.0 * theta[i] - zeta[i];
        GridSignal pg = axis_prox(refl, 2, order, lambda, inner_tol, threads);
        for (Index i = 0; i < zeta.n(); ++i) zeta[i] += pg[i] - theta[i];
        if (hook) hook(it + 1, theta);
    }
    FitResult res;
    res.theta = theta;
    res.objective = objective(y, theta, k, lambda);
    res.iters = iters;
    return res;
}

int split_index_for(const std::string& solver, int k) {
    if (solver == "admm-type0") return 0;
    if (solver == "admm-type1") return std::min(1, k + 1);
    if (solver == "admm-type2") return k;
    if (solver == "admm-soft") return k + 1;
    throw std::invalid_argument("unknown ADMM solver name: " + solver);
}

FitResult solve_named(const std::string& solver, const GridSignal& y, int k, double lambda,
                      const AdmmConfig& base, int splitting_iters, double ref_tol) {
    if (solver == "dual-ref")
        return dual_reference_solve(y, k, lambda, ref_tol, 200000, base.iter_hook);
    if (solver == "dykstra")
        return prox_dykstra(y, k, lambda, splitting_iters, base.inner_tol, base.threads,
                            base.iter_hook);
    if (solver == "dr")
        return douglas_rachford(y, k, lambda, splitting_iters, base.inner_tol, base.threads,
                                base.iter_hook);
    AdmmConfig cfg = base;
    cfg.j = split_index_for(solver, k);
    return ktf_admm(y, k, lambda, cfg);
}

}  // namespace ktf
