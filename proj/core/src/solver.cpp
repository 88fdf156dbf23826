#include "mltspec/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cstdio>

#include "mltspec/channel.hpp"

namespace mltspec {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "?";
}

namespace {

// Projection onto the data constraint through the operator's thin SVD.
// Equality: l = v - Q^+(Q v - y). Ball: exact projection, solving the secular
// equation in the singular basis.
class DataProjector {
  public:
    DataProjector(const MeasurementOperator& op, const VectorXcd& y, SolveMode mode, double radius_sq)
        : mode_(mode), radius_sq_(radius_sq) {
        const OperatorSvd& svd = op.svd();
        v_ = svd.v;
        s_ = svd.s;
        yhat_ = svd.u.adjoint() * y;
        y_perp_sq_ = (y - svd.u * yhat_).squaredNorm();  // residual form, no cancellation
        sinv_yhat_.resize(yhat_.size());
        for (Eigen::Index i = 0; i < yhat_.size(); ++i) sinv_yhat_(i) = yhat_(i) / s_(i);
        y_norm_ = y.norm();
    }

    bool feasible() const {
        if (mode_ == SolveMode::NoiselessEquality)
            return y_perp_sq_ <= std::pow(std::max(1e-9 * y_norm_, 1e-12), 2);
        return y_perp_sq_ <= radius_sq_ * (1.0 + 1e-12);
    }

    void project(const VectorXcd& v, VectorXcd& out) const {
        VectorXcd w = v_.adjoint() * v;
        if (mode_ == SolveMode::NoiselessEquality) {
            out.noalias() = v + v_ * (sinv_yhat_ - w);
            return;
        }
        VectorXcd resid(w.size());
        for (Eigen::Index i = 0; i < w.size(); ++i) resid(i) = s_(i) * w(i) - yhat_(i);
        const double in_sq = resid.squaredNorm();
        if (in_sq + y_perp_sq_ <= radius_sq_) {
            out = v;
            return;
        }
        // sum_i |resid_i|^2 / (1 + mu s_i^2)^2 = radius^2 - ||y_perp||^2,
        // monotone decreasing in mu: safeguarded bisection.
        const double target = std::max(radius_sq_ - y_perp_sq_, 0.0);
        auto phi = [&](double m) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < s_.size(); ++i) {
                const double den = 1.0 + m * s_(i) * s_(i);
                acc += std::norm(resid(i)) / (den * den);
            }
            return acc - target;
        };
        double lo = 0.0, hi = 1.0;
        while (phi(hi) > 0.0 && hi < 1e18) hi *= 4.0;
        double mu = hi;
        for (int iter = 0; iter < 200; ++iter) {
            mu = 0.5 * (lo + hi);
            const double f = phi(mu);
            if (std::abs(f) <= 1e-13 * std::max(target, 1e-30)) break;
            (f > 0.0 ? lo : hi) = mu;
        }
        VectorXcd w_new(w.size());
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w_new(i) = (w(i) + mu * s_(i) * yhat_(i)) / (1.0 + mu * s_(i) * s_(i));
        out.noalias() = v + v_ * (w_new - w);
    }

  private:
    SolveMode mode_;
    double radius_sq_;
    MatrixXcd v_;
    VectorXd s_;
    VectorXcd yhat_;
    VectorXcd sinv_yhat_;
    double y_perp_sq_ = 0.0;
    double y_norm_ = 0.0;
};

// Norm on the structured tuple (t, l, lag means) induced by the Frobenius
// norm of the bordered embedding; lag a carries count(a) entries.
double structured_norm(double dt, const VectorXcd& dl, const VectorXcd& du, const LagTable& table) {
    double acc = dt * dt + 2.0 * dl.squaredNorm();
    const auto& counts = table.counts();
    for (Eigen::Index i = 0; i < du.size(); ++i)
        acc += counts[static_cast<size_t>(i)] * std::norm(du(i));
    return std::sqrt(acc);
}

}  // namespace

SolveReport solve(const ANProblem& problem) {
    if (problem.op == nullptr) throw std::invalid_argument("solve: missing measurement operator");
    const MeasurementOperator& op = *problem.op;
    if (problem.y.size() != op.l()) throw std::invalid_argument("solve: observation length mismatch");
    if (!(op.dims() == problem.dims)) throw std::invalid_argument("solve: dims mismatch with operator");
    if (!problem.dims.canonical()) throw std::invalid_argument("solve: dims must be canonical");
    if (problem.mode == SolveMode::NoiselessEquality && problem.noise_bound != 0.0)
        throw std::invalid_argument("solve: noiseless mode requires a zero noise bound");

    const SolverConfig& cfg = problem.config;
    const double tol = (problem.mode == SolveMode::NoiselessEquality) ? cfg.tol_noiseless : cfg.tol_noisy;
    auto table = LagTable::shared(problem.dims);
    const long lu = table->l_u();
    const long n = lu + 1;

    SolveReport rep;
    rep.t_hat = MLTGenerator(problem.dims);
    rep.l_u_hat = VectorXcd::Zero(lu);

    const double radius_sq = static_cast<double>(op.l()) * problem.noise_bound;
    DataProjector proj(op, problem.y, problem.mode, radius_sq);
    if (!proj.feasible()) {
        rep.status = SolveStatus::Infeasible;
        return rep;
    }

    double rho = cfg.rho_init;
    const double alpha = cfg.relaxation;

    // Structured variables (t, l, lag coefficients u).
    double t_cur;
    VectorXcd l_cur(lu), u_cur(table->n_lags());
    {
        VectorXcd zero_vec = VectorXcd::Zero(lu);
        proj.project(zero_vec, l_cur);
        const double lnorm = l_cur.norm();
        if (lnorm > 0.0) {
            MatrixXcd outer = l_cur * l_cur.adjoint() / lnorm;
            project_to_mlt_into(outer, *table, u_cur);
        } else {
            u_cur.setZero();
        }
        t_cur = lnorm;
    }

    MatrixXcd m_mat(n, n), z_mat(n, n), u_dual(n, n), w_mat(n, n), z_prev(n, n), side(n, n);
    auto assemble = [&](MatrixXcd& dst, double t, const VectorXcd& l, const VectorXcd& u) {
        const cxd* c = u.data();
        for (long col = 0; col < lu; ++col)
            for (long row = 0; row < lu; ++row) dst(row, col) = c[table->pair_lag(row, col)];
        dst.col(n - 1).head(lu) = l;
        dst.row(n - 1).head(lu) = l.conjugate();
        dst(n - 1, n - 1) = t;
    };

    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig;
    assemble(m_mat, t_cur, l_cur, u_cur);
    eig.compute(m_mat);
    {  // start from the PSD part of the initial iterate
        const VectorXd& ev = eig.eigenvalues();
        z_mat.setZero();
        int n_pos = 0;
        for (long i = 0; i < n; ++i)
            if (ev(i) > 0.0) ++n_pos;
        if (n_pos > 0) {
            auto vpos = eig.eigenvectors().rightCols(n_pos);
            side.resize(n, n_pos);
            side.noalias() = vpos * ev.tail(n_pos).asDiagonal();
            z_mat.noalias() = side.leftCols(n_pos) * vpos.adjoint();
        }
    }
    u_dual.setZero();

    VectorXcd g_col(lu), du(table->n_lags());
    double r_pri = 0.0, s_dual = 0.0, eps_den_pri = 1.0, eps_den_dual = 1.0;
    int it = 0;
    bool converged = false;

    for (it = 1; it <= cfg.max_iterations; ++it) {
        // x-update against G = Z - U (w_mat reused as G).
        w_mat = z_mat - u_dual;
        t_cur = w_mat(n - 1, n - 1).real() - 0.5 / rho;
        g_col = w_mat.col(n - 1).head(lu);
        proj.project(g_col, l_cur);
        project_to_mlt_into(w_mat.topLeftCorner(lu, lu), *table, u_cur);
        u_cur(table->zero_lag()) -= 0.5 / rho;
        assemble(m_mat, t_cur, l_cur, u_cur);

        // Relaxed consensus target; U_new = W - proj_PSD(W).
        z_prev.swap(z_mat);
        w_mat = alpha * m_mat + (1.0 - alpha) * z_prev + u_dual;
        eig.compute(w_mat);
        const VectorXd& ev = eig.eigenvalues();
        int n_neg = 0;
        while (n_neg < n && ev(n_neg) < 0.0) ++n_neg;
        const int n_pos = static_cast<int>(n) - n_neg;
        if (n_pos <= n_neg) {
            auto vpos = eig.eigenvectors().rightCols(n_pos);
            side.resize(n, n_pos);
            if (n_pos > 0) side.noalias() = vpos * ev.tail(n_pos).asDiagonal();
            z_mat.setZero();
            if (n_pos > 0) z_mat.noalias() = side.leftCols(n_pos) * vpos.adjoint();
            u_dual = w_mat - z_mat;
        } else {
            auto vneg = eig.eigenvectors().leftCols(n_neg);
            side.resize(n, n_neg);
            if (n_neg > 0) side.noalias() = vneg * ev.head(n_neg).asDiagonal();
            u_dual.setZero();
            if (n_neg > 0) u_dual.noalias() = side.leftCols(n_neg) * vneg.adjoint();
            z_mat = w_mat - u_dual;
        }

        // Residuals: primal on the unrelaxed consensus gap, dual mapped back
        // through the structure adjoint.
        r_pri = (m_mat - z_mat).norm();
        w_mat = z_mat - z_prev;
        project_to_mlt_into(w_mat.topLeftCorner(lu, lu), *table, du);
        s_dual = rho * structured_norm(w_mat(n - 1, n - 1).real(), w_mat.col(n - 1).head(lu), du, *table);

        eps_den_pri = std::max({1.0, m_mat.norm(), z_mat.norm()});
        project_to_mlt_into(u_dual.topLeftCorner(lu, lu), *table, du);
        eps_den_dual = std::max(
            1.0, rho * structured_norm(u_dual(n - 1, n - 1).real(), u_dual.col(n - 1).head(lu), du, *table));

        if (cfg.trace_interval > 0 && it % cfg.trace_interval == 0)
            std::fprintf(stderr, "it=%d rho=%.3g r=%.3e (den %.3g) s=%.3e (den %.3g) obj=%.8g\n", it, rho,
                         r_pri, eps_den_pri, s_dual, eps_den_dual,
                         0.5 * (t_cur + static_cast<double>(lu) * u_cur(table->zero_lag()).real()));

        if (r_pri <= tol * eps_den_pri && s_dual <= tol * eps_den_dual) {
            converged = true;
            break;
        }

        if (it % cfg.rho_interval == 0) {
            const double rr = r_pri / eps_den_pri, ss = s_dual / eps_den_dual;
            if (rr > cfg.rho_ratio * ss && rho < 1e6) {
                rho *= cfg.rho_factor;
                u_dual /= cfg.rho_factor;
            } else if (ss > cfg.rho_ratio * rr && rho > 1e-6) {
                rho /= cfg.rho_factor;
                u_dual *= cfg.rho_factor;
            }
        }
    }

    rep.iterations = std::min(it, cfg.max_iterations);
    rep.status = converged ? SolveStatus::Optimal : SolveStatus::MaxIter;
    rep.primal_residual = r_pri;
    rep.dual_residual = s_dual;
    rep.rho = rho;
    rep.t_scalar = t_cur;
    rep.l_u_hat = l_cur;
    rep.t_hat = MLTGenerator(table, u_cur);
    rep.objective = 0.5 * (t_cur + rep.t_hat.trace());
    rep.data_residual = (op.apply(l_cur) - problem.y).norm();

    eig.compute(m_mat, Eigen::EigenvaluesOnly);
    rep.psd_slack = eig.eigenvalues().minCoeff();

    Eigen::SelfAdjointEigenSolver<MatrixXcd> teig(rep.t_hat.realize(), Eigen::EigenvaluesOnly);
    const VectorXd& tv = teig.eigenvalues();
    const double tmax = std::max(tv.maxCoeff(), 0.0);
    rep.rank_estimate = 0;
    for (Eigen::Index i = 0; i < tv.size(); ++i)
        if (tv(i) > cfg.rank_tol * tmax) ++rep.rank_estimate;
    return rep;
}

ExtractedModel extract_frequencies(const SolveReport& report, std::optional<int> k_known) {
    if (report.status == SolveStatus::Infeasible)
        throw std::invalid_argument("extract_frequencies: infeasible solve");
    const int r = k_known.value_or(report.rank_estimate);
    DecomposeOptions opts;
    opts.forced_rank = r;
    opts.strict = false;
    ExtractedModel out;
    out.decomposition = decompose(report.t_hat, opts);  // refuses r > L_d
    out.freqs = out.decomposition.freqs;
    if (out.freqs.count() > 0) {
        MatrixXcd u = atom_matrix(report.t_hat.dims(), out.freqs);
        out.gains = u.colPivHouseholderQr().solve(report.l_u_hat);
    } else {
        out.gains = VectorXcd(0);
    }
    return out;
}

RecoveryConditions check_recovery_conditions(const DimensionVector& dims, int k,
                                             const MeasurementOperator* op,
                                             std::optional<int> solved_rank) {
    RecoveryConditions rc;
    const int d = dims.order();
    long dim_sum = 0;
    for (int i = 0; i < d; ++i) dim_sum += dims[i];
    rc.last_dim_exceeds_k = dims[d - 1] > k;
    rc.dim_sum_ok = dim_sum >= 2L * k + (d - 1);

    if (op != nullptr) {
        rc.kappa = reconstruction_degree(op->sensing()).kappa;
        rc.kappa_ok = rc.kappa >= 2L * k + (d - 1);
        const PilotMatrix& pilot = op->pilot();
        MatrixXcd pt = pilot.entries.transpose();
        rc.pilot_left_pseudo_inverse = (pilot.p() >= pilot.m()) && (numerical_rank(pt) == pilot.m());
        if (pilot.m() <= 8 && pilot.p() <= 8) {
            rc.pilot_krank = check_pilot_conditions(pilot).krank;
            rc.pilot_krank_ok = (rc.pilot_krank == pilot.p()) && (pilot.p() > 2 * k);
        }
    } else {
        // Uniform full arrays reach kappa = sum of dims.
        rc.kappa = static_cast<int>(dim_sum);
        rc.kappa_ok = rc.dim_sum_ok;
    }

    if (solved_rank) {
        const int r = *solved_rank;
        rc.posthoc_dim_ok = (dims[d - 1] > r) && (dim_sum > 2L * r + (d - 1));
        rc.posthoc_kappa_ok = (dims[d - 1] > r) && (rc.kappa > 2L * r + (d - 1));
    }
    return rc;
}

double atomic_norm_value(const SolveReport& report) { return report.objective; }

}  // namespace mltspec
