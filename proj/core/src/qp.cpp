#include "ccopf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace ccopf::qp {

double QpProblem::objective(const Vector& x) const {
    return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant;
}

Eigen::Index QpBuilder::add_variable() { return num_vars_++; }

Eigen::Index QpBuilder::add_variables(Eigen::Index count) {
    const Eigen::Index first = num_vars_;
    num_vars_ += count;
    return first;
}

void QpBuilder::add_square(Eigen::Index i, double coeff) {
    if (coeff != 0.0) hessian_.emplace_back(i, i, 2.0 * coeff);
}

void QpBuilder::add_linear(Eigen::Index i, double coeff) {
    if (coeff != 0.0) linear_.emplace_back(i, coeff);
}

void QpBuilder::add_equality(const RowEntries& row, double rhs, std::string tag, double weight) {
    if (!std::isfinite(rhs)) throw std::invalid_argument("equality right-hand side must be finite");
    const auto r = static_cast<Eigen::Index>(eq_rhs_.size());
    for (const auto& [j, v] : row) eq_.emplace_back(r, j, v);
    eq_rhs_.push_back(rhs);
    eq_tags_.push_back(std::move(tag));
    eq_weights_.push_back(weight);
}

void QpBuilder::add_less_equal(const RowEntries& row, double rhs, std::string tag, double weight) {
    if (std::isnan(rhs) || rhs == -std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("inequality right-hand side must be finite or +inf");
    }
    if (rhs == std::numeric_limits<double>::infinity()) return;
    const auto r = static_cast<Eigen::Index>(ineq_rhs_.size());
    for (const auto& [j, v] : row) ineq_.emplace_back(r, j, v);
    ineq_rhs_.push_back(rhs);
    ineq_tags_.push_back(std::move(tag));
    ineq_weights_.push_back(weight);
}

void QpBuilder::add_greater_equal(const RowEntries& row, double rhs, std::string tag, double weight) {
    RowEntries negated = row;
    for (auto& e : negated) e.second = -e.second;
    add_less_equal(negated, -rhs, std::move(tag), weight);
}

void QpBuilder::add_lower_bound(Eigen::Index i, double lower, std::string tag, double weight) {
    add_greater_equal({{i, 1.0}}, lower, std::move(tag), weight);
}

void QpBuilder::add_upper_bound(Eigen::Index i, double upper, std::string tag, double weight) {
    add_less_equal({{i, 1.0}}, upper, std::move(tag), weight);
}

QpProblem QpBuilder::build() const {
    QpProblem p;
    p.num_vars = num_vars_;
    p.hessian.resize(num_vars_, num_vars_);
    p.hessian.setFromTriplets(hessian_.begin(), hessian_.end());
    p.linear = Vector::Zero(num_vars_);
    for (const auto& [i, v] : linear_) p.linear[i] += v;
    p.constant = constant_;

    const auto me = static_cast<Eigen::Index>(eq_rhs_.size());
    p.eq.resize(me, num_vars_);
    p.eq.setFromTriplets(eq_.begin(), eq_.end());
    p.eq_rhs = Eigen::Map<const Vector>(eq_rhs_.data(), me);
    p.eq_tags = eq_tags_;
    p.eq_weights = eq_weights_;

    const auto mi = static_cast<Eigen::Index>(ineq_rhs_.size());
    p.ineq.resize(mi, num_vars_);
    p.ineq.setFromTriplets(ineq_.begin(), ineq_.end());
    p.ineq_rhs = Eigen::Map<const Vector>(ineq_rhs_.data(), mi);
    p.ineq_tags = ineq_tags_;
    p.ineq_weights = ineq_weights_;
    return p;
}

const char* to_string(QpStatus status) {
    switch (status) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Infeasible: return "infeasible";
        case QpStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

Vector row_scales(const SparseMatrix& m) {
    Vector scale = Vector::Ones(m.rows());
    Vector rmax = Vector::Zero(m.rows());
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            rmax[it.row()] = std::max(rmax[it.row()], std::abs(it.value()));
        }
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (rmax[i] > 0.0) scale[i] = 1.0 / rmax[i];
    }
    return scale;
}

double max_step(const Vector& v, const Vector& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    }
    return a;
}

/// Regularized KKT system [[H + diag(rho), A'], [A, -rho_d I]] with refinement
/// against the unregularized matrix. The quasi-definite LDL' is tried first;
/// a pivoting LU of the same matrix takes over when LDL' meets a zero pivot
/// or its refined solution stays inaccurate.
class KktSolver {
public:
    KktSolver(Eigen::Index n, const SparseMatrix& eq, double rho, int refinements)
        : n_(n), me_(eq.rows()), base_rho_(rho), refinements_(refinements), eq_(eq) {}

    /// Retries with growing regularization when both factorizations fail. The
    /// primal shift is relative to each diagonal entry so that huge barrier
    /// weights on one variable do not drown the curvature of another.
    bool factor(const SparseMatrix& h) {
        Vector diag = Vector::Zero(n_);
        for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
                if (it.row() == it.col()) diag[it.row()] = std::abs(it.value());
            }
        }
        double abs_shift = base_rho_, rel_shift = 1e-15;
        for (int attempt = 0; attempt < 7; ++attempt, abs_shift *= 100.0, rel_shift *= 100.0) {
            rho_ = (rel_shift * diag).cwiseMax(abs_shift);
            rho_d_ = abs_shift;
            assemble(h);
            use_lu_ = prefer_lu_;
            if (!use_lu_) {
                if (!same_pattern(reg_, ldlt_pattern_)) ldlt_.analyzePattern(reg_);
                ldlt_.factorize(reg_);
                use_lu_ = ldlt_.info() != Eigen::Success;
            }
            if (!use_lu_) return true;
            if (factor_lu()) {
                prefer_lu_ = true;
                return true;
            }
        }
        return false;
    }

    Vector solve(const Vector& rhs) {
        const double target = 1e-10 * std::max(1.0, inf_norm(rhs));
        double rn = 0.0;
        Vector sol = refined(rhs, rn);
        if (rn > target && !use_lu_ && factor_lu()) {
            // Once LDL' has proved inaccurate for this problem, later
            // iterations go straight to LU.
            use_lu_ = prefer_lu_ = true;
            double lu_rn = 0.0;
            Vector alt = refined(rhs, lu_rn);
            if (lu_rn < rn) sol = std::move(alt);
        }
        return sol;
    }

private:
    void assemble(const SparseMatrix& h) {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<std::size_t>(h.nonZeros() + eq_.nonZeros() + n_ + me_));
        for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
                if (it.row() >= it.col()) t.emplace_back(it.row(), it.col(), it.value());
            }
        }
        for (Eigen::Index k = 0; k < eq_.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(eq_, k); it; ++it) {
                t.emplace_back(n_ + it.row(), it.col(), it.value());
            }
        }
        for (Eigen::Index i = 0; i < n_; ++i) t.emplace_back(i, i, rho_[i]);
        for (Eigen::Index i = 0; i < me_; ++i) t.emplace_back(n_ + i, n_ + i, -rho_d_);
        reg_.resize(n_ + me_, n_ + me_);
        reg_.setFromTriplets(t.begin(), t.end());
        lu_ready_ = false;
    }

    bool factor_lu() {
        if (lu_ready_) return lu_ok_;
        lu_ready_ = true;
        const SparseMatrix full = reg_.selfadjointView<Eigen::Lower>();
        if (!same_pattern(full, lu_pattern_)) lu_.analyzePattern(full);
        lu_.factorize(full);
        lu_ok_ = lu_.info() == Eigen::Success;
        return lu_ok_;
    }

    struct Pattern {
        std::vector<int> outer, inner;
    };

    // The sparsity of the KKT matrix is fixed within one QP, so the ordering
    // is computed once and reused while the pattern stays the same.
    static bool same_pattern(const SparseMatrix& m, Pattern& cached) {
        const auto cols = static_cast<std::size_t>(m.outerSize());
        const auto nnz = static_cast<std::size_t>(m.nonZeros());
        const bool same = cached.outer.size() == cols + 1 && cached.inner.size() == nnz &&
                          std::equal(cached.outer.begin(), cached.outer.end(), m.outerIndexPtr()) &&
                          std::equal(cached.inner.begin(), cached.inner.end(), m.innerIndexPtr());
        if (!same) {
            cached.outer.assign(m.outerIndexPtr(), m.outerIndexPtr() + cols + 1);
            cached.inner.assign(m.innerIndexPtr(), m.innerIndexPtr() + nnz);
        }
        return same;
    }

    Vector base_solve(const Vector& r) { return use_lu_ ? Vector(lu_.solve(r)) : Vector(ldlt_.solve(r)); }

    // Refine until the true residual stops shrinking; heavy regularization
    // needs more than the nominal number of sweeps.
    Vector refined(const Vector& rhs, double& rn) {
        Vector sol = base_solve(rhs);
        Vector r = rhs - apply_true(sol);
        rn = inf_norm(r);
        const double floor = 1e-15 * std::max(1.0, inf_norm(rhs));
        for (int k = 0; k < std::max(refinements_, 50) && rn > floor; ++k) {
            Vector next = sol + base_solve(r);
            Vector rnext = rhs - apply_true(next);
            const double nn = inf_norm(rnext);
            if (!(nn < rn)) break;
            const bool slow = k >= refinements_ && nn > 0.5 * rn;
            sol = std::move(next);
            r = std::move(rnext);
            rn = nn;
            if (slow) break;
        }
        if (!std::isfinite(rn)) rn = std::numeric_limits<double>::infinity();
        return sol;
    }

    Vector apply_true(const Vector& v) const {
        Vector out = reg_.selfadjointView<Eigen::Lower>() * v;
        out.head(n_) -= rho_.cwiseProduct(v.head(n_));
        out.tail(me_) += rho_d_ * v.tail(me_);
        return out;
    }

    Eigen::Index n_, me_;
    double base_rho_;
    Vector rho_;
    double rho_d_ = 0.0;
    int refinements_;
    const SparseMatrix& eq_;
    SparseMatrix reg_;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
    Pattern ldlt_pattern_, lu_pattern_;
    bool use_lu_ = false;
    bool prefer_lu_ = false;
    bool lu_ready_ = false;
    bool lu_ok_ = false;
};

void fill_residuals(const QpProblem& p, QpSolution& sol) {
    const Vector& x = sol.x;
    double pr = 0.0;
    if (p.eq.rows() > 0) pr = inf_norm(p.eq * x - p.eq_rhs);
    if (p.ineq.rows() > 0) pr = std::max(pr, std::max(0.0, (p.ineq * x - p.ineq_rhs).maxCoeff()));
    sol.primal_residual = pr;
    Vector rd = p.hessian * x + p.linear;
    if (p.eq.rows() > 0 && sol.eq_dual.size() == p.eq.rows()) rd += p.eq.transpose() * sol.eq_dual;
    if (p.ineq.rows() > 0 && sol.ineq_dual.size() == p.ineq.rows()) rd += p.ineq.transpose() * sol.ineq_dual;
    sol.dual_residual = inf_norm(rd);
    sol.objective = p.objective(x);
}

}  // namespace

QpSolution InteriorPointQp::solve(const QpProblem& problem) const {
    QpSolution sol = solve_core(problem);
    if (sol.status == QpStatus::Optimal) return sol;
    return certify(problem, std::move(sol));
}

QpSolution InteriorPointQp::solve_core(const QpProblem& problem) const {
    const Eigen::Index n = problem.num_vars;
    const Eigen::Index me = problem.eq.rows();
    const Eigen::Index mi = problem.ineq.rows();

    const Vector de = row_scales(problem.eq);
    const Vector dg = row_scales(problem.ineq);
    const SparseMatrix a = de.asDiagonal() * problem.eq;
    const Vector b = de.cwiseProduct(problem.eq_rhs);
    const SparseMatrix g = dg.asDiagonal() * problem.ineq;
    const SparseMatrix gt = g.transpose();
    const Vector h = dg.cwiseProduct(problem.ineq_rhs);
    const SparseMatrix& pmat = problem.hessian;
    const Vector& q = problem.linear;

    const double tol = options_.tolerance;
    const double bnorm = 1.0 + std::max(inf_norm(b), inf_norm(h));
    const double qnorm = 1.0 + inf_norm(q);

    KktSolver kkt(n, a, options_.regularization, options_.refinement_steps);

    QpSolution out;
    Vector x = Vector::Zero(n);
    Vector y = Vector::Zero(me);
    Vector s = Vector::Ones(mi);
    Vector z = Vector::Ones(mi);

    // Starting point: minimize 1/2 x'Px + q'x + 1/2 |Gx - h|^2 subject to Ax = b.
    {
        SparseMatrix hmat = pmat + gt * g;
        if (!kkt.factor(hmat)) {
            out.x = x;
            return out;
        }
        Vector rhs(n + me);
        rhs.head(n) = -q + gt * h;
        rhs.tail(me) = b;
        Vector sol = kkt.solve(rhs);
        if (sol.allFinite()) x = sol.head(n);
        if (mi > 0) {
            // Shift the primal slack and its dual mirror into the interior.
            const Vector r = h - g * x;
            const double ap = -r.minCoeff();
            s = ap < 0.0 ? r : Vector(r.array() + 1.0 + ap);
            const double ad = r.maxCoeff();
            z = ad < 0.0 ? Vector(-r) : Vector((-r).array() + 1.0 + ad);
        }
    }

    // Best iterate meeting the contract tolerance, kept in case the strict
    // tolerance is out of reach of the linear algebra.
    constexpr double kAcceptable = 1e-8;
    bool have_acceptable = false;
    Vector ax, ay, az;
    double ascore = std::numeric_limits<double>::infinity();

    int small_steps = 0, stalled = 0;
    double last_rp = std::numeric_limits<double>::infinity();
    int iter = 0;
    bool converged = false;
    for (; iter < options_.max_iterations; ++iter) {
        const Vector px = pmat * x, aty = a.transpose() * y, gtz = gt * z, eq_lhs = a * x, in_lhs = g * x;
        Vector rd = px + q + aty + gtz;
        Vector rpe = eq_lhs - b;
        Vector rpi = in_lhs + s - h;
        // Residuals are measured against the size of the terms they cancel;
        // large multipliers leave an absolute floor no solve can go below.
        const double pscale = std::max({bnorm, 1.0 + inf_norm(eq_lhs), 1.0 + inf_norm(in_lhs)});
        const double dscale = std::max({qnorm, 1.0 + inf_norm(px), 1.0 + inf_norm(aty), 1.0 + inf_norm(gtz)});
        const double gap = mi > 0 ? s.dot(z) : 0.0;
        const double mu = mi > 0 ? gap / static_cast<double>(mi) : 0.0;
        const double pobj = 0.5 * x.dot(pmat * x) + q.dot(x);

        const double rp = std::max(inf_norm(rpe), inf_norm(rpi));
        const double rdn = inf_norm(rd);
        if (rp <= tol * pscale && rdn <= tol * dscale && gap <= tol * std::max(1.0, std::abs(pobj))) {
            converged = true;
            break;
        }
        if (rp <= kAcceptable * pscale && rdn <= kAcceptable * dscale &&
            gap <= kAcceptable * std::max(1.0, std::abs(pobj))) {
            const double score = std::max({rp / pscale, rdn / dscale, gap / std::max(1.0, std::abs(pobj))});
            if (score < ascore) {
                have_acceptable = true;
                ascore = score;
                ax = x;
                ay = y;
                az = z;
            }
            // Residuals no longer improve: further steps only shrink the gap.
            stalled = rp > 0.5 * last_rp ? stalled + 1 : 0;
            if (stalled >= 5) break;
        }
        last_rp = std::min(last_rp, rp);
        if (!x.allFinite() || !z.allFinite() || !y.allFinite()) break;
        if (inf_norm(x) > 1e14 || inf_norm(z) > 1e13 || inf_norm(y) > 1e13) break;

        const Vector w = mi > 0 ? Vector(z.cwiseQuotient(s)) : Vector();
        SparseMatrix hmat = pmat;
        if (mi > 0) hmat += gt * w.asDiagonal() * g;
        if (!kkt.factor(hmat)) break;

        auto newton = [&](const Vector& rc, Vector& dx, Vector& dy, Vector& ds, Vector& dz) {
            Vector rhs(n + me);
            if (mi > 0) {
                Vector t = (-rc + z.cwiseProduct(rpi)).cwiseQuotient(s);
                rhs.head(n) = -rd - gt * t;
            } else {
                rhs.head(n) = -rd;
            }
            rhs.tail(me) = -rpe;
            Vector sol = kkt.solve(rhs);
            dx = sol.head(n);
            dy = sol.tail(me);
            if (mi > 0) {
                ds = -rpi - g * dx;
                dz = (-rc - z.cwiseProduct(ds)).cwiseQuotient(s);
            } else {
                ds.resize(0);
                dz.resize(0);
            }
        };

        Vector dx, dy, ds, dz;
        double step = 1.0;
        if (mi > 0) {
            Vector rc = s.cwiseProduct(z);
            newton(rc, dx, dy, ds, dz);
            const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
            const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(mi);
            const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
            rc = s.cwiseProduct(z) + ds.cwiseProduct(dz) - Vector::Constant(mi, sigma * mu);
            newton(rc, dx, dy, ds, dz);
            step = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));
        } else {
            newton(Vector(), dx, dy, ds, dz);
        }
        if (!dx.allFinite()) break;

        x += step * dx;
        y += step * dy;
        if (mi > 0) {
            s += step * ds;
            z += step * dz;
        }
        small_steps = step < 1e-8 ? small_steps + 1 : 0;
        if (small_steps >= 5) break;
    }

    if (!converged && have_acceptable) {
        converged = true;
        x = ax;
        y = ay;
        z = az;
        s = (h - g * x).cwiseMax(0.0);
    }
    out.x = x;
    out.eq_dual = de.cwiseProduct(y);
    out.ineq_dual = dg.cwiseProduct(z);
    out.iterations = iter;
    out.gap = mi > 0 ? s.dot(z) : 0.0;
    out.status = converged ? QpStatus::Optimal : QpStatus::NumericalFailure;
    fill_residuals(problem, out);
    return out;
}

QpSolution InteriorPointQp::certify(const QpProblem& problem, QpSolution failed) const {
    const Eigen::Index n = problem.num_vars;
    const Eigen::Index me = problem.eq.rows();
    const Eigen::Index mi = problem.ineq.rows();

    // Elastic relaxation: minimize weighted violation; always feasible.
    QpBuilder elastic;
    elastic.add_variables(n);
    // A tiny ridge keeps the original variables bounded when the optimal face of
    // the elastic LP is not; its gradient stays far below every elastic weight.
    for (Eigen::Index i = 0; i < n; ++i) elastic.add_square(i, 1e-10);
    const Eigen::Index ep = elastic.add_variables(me);
    const Eigen::Index em = elastic.add_variables(me);
    const Eigen::Index ei = elastic.add_variables(mi);

    std::vector<RowEntries> eq_rows(static_cast<std::size_t>(me));
    std::vector<RowEntries> in_rows(static_cast<std::size_t>(mi));
    for (Eigen::Index k = 0; k < problem.eq.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(problem.eq, k); it; ++it) {
            eq_rows[static_cast<std::size_t>(it.row())].emplace_back(it.col(), it.value());
        }
    }
    for (Eigen::Index k = 0; k < problem.ineq.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(problem.ineq, k); it; ++it) {
            in_rows[static_cast<std::size_t>(it.row())].emplace_back(it.col(), it.value());
        }
    }
    for (Eigen::Index r = 0; r < me; ++r) {
        auto row = eq_rows[static_cast<std::size_t>(r)];
        row.emplace_back(ep + r, 1.0);
        row.emplace_back(em + r, -1.0);
        elastic.add_equality(row, problem.eq_rhs[r], "elastic");
        const double w = problem.eq_weights[static_cast<std::size_t>(r)];
        elastic.add_linear(ep + r, w);
        elastic.add_linear(em + r, w);
        elastic.add_lower_bound(ep + r, 0.0, "elastic");
        elastic.add_lower_bound(em + r, 0.0, "elastic");
    }
    for (Eigen::Index r = 0; r < mi; ++r) {
        auto row = in_rows[static_cast<std::size_t>(r)];
        row.emplace_back(ei + r, -1.0);
        elastic.add_less_equal(row, problem.ineq_rhs[r], "elastic");
        elastic.add_linear(ei + r, problem.ineq_weights[static_cast<std::size_t>(r)]);
        elastic.add_lower_bound(ei + r, 0.0, "elastic");
    }

    const QpSolution phase1 = solve_core(elastic.build());
    if (phase1.status != QpStatus::Optimal) return failed;

    std::set<std::string> tags;
    bool infeasible = false;
    const double tol = options_.infeasibility_tolerance;
    for (Eigen::Index r = 0; r < me; ++r) {
        const double v = phase1.x[ep + r] + phase1.x[em + r];
        if (v > tol * (1.0 + std::abs(problem.eq_rhs[r]))) {
            infeasible = true;
            tags.insert(problem.eq_tags[static_cast<std::size_t>(r)]);
        }
    }
    for (Eigen::Index r = 0; r < mi; ++r) {
        const double v = phase1.x[ei + r];
        if (v > tol * (1.0 + std::abs(problem.ineq_rhs[r]))) {
            infeasible = true;
            tags.insert(problem.ineq_tags[static_cast<std::size_t>(r)]);
        }
    }
    if (!infeasible) return failed;
    failed.status = QpStatus::Infeasible;
    failed.infeasible_tags.assign(tags.begin(), tags.end());
    return failed;
}

}  // namespace ccopf::qp
