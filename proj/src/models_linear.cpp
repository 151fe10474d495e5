#include <cmath>

#include <Eigen/Dense>

#include "tabreg/models.hpp"

namespace tabreg::models {

std::string current_timestamp();

namespace {

// Population standard deviation per column; constant columns report 0.
Eigen::VectorXd population_std(const Eigen::MatrixXd& X, const Eigen::RowVectorXd& mean) {
    Eigen::VectorXd sd(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        sd(j) = std::sqrt((X.col(j).array() - mean(j)).square().mean());
    }
    return sd;
}

double soft_threshold(double rho, double alpha) {
    if (rho > alpha) return rho - alpha;
    if (rho < -alpha) return rho + alpha;
    return 0.0;
}

} // namespace

TrainedModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<std::string> names) {
    const Eigen::Index n = X.rows(), k = X.cols();
    if (y.size() != n) throw DataError("fit_ols: X/y row mismatch");
    if (n <= k) throw DataError("fit_ols needs n_rows > n_features");
    names = default_feature_names(std::move(names), k);

    Eigen::MatrixXd Z(n, k + 1);
    Z.col(0).setOnes();
    Z.rightCols(k) = X;

    TrainedModel model;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    const bool deficient = qr.rank() < Z.cols();
    Eigen::MatrixXd ZtZ = Z.transpose() * Z;
    if (deficient) {
        // Ridge jitter keeps the normal equations solvable; the dependent
        // columns are reported in the training warnings.
        ZtZ.diagonal().array() += 1e-10;
        std::string dependent;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < Z.cols(); ++i) {
            const Eigen::Index col = perm(i);
            if (col == 0) continue; // intercept
            if (!dependent.empty()) dependent += ", ";
            const auto fi = static_cast<std::size_t>(col - 1);
            dependent += fi < names.size() ? names[fi] : ("feature_" + std::to_string(fi));
        }
        model.meta.warnings.push_back("rank-deficient design; ridge jitter 1e-10 applied; "
                                      "dependent columns: " + dependent);
    }
    const Eigen::VectorXd beta = ZtZ.ldlt().solve(Z.transpose() * y);
    if (!beta.allFinite()) throw DataError("fit_ols: degenerate design, solve failed");

    LinearModel lin;
    lin.intercept = beta(0);
    lin.coefficients = beta.tail(k);
    lin.feature_std = population_std(X, X.colwise().mean());
    model.spec.algorithm = Algorithm::ols;
    model.feature_names = std::move(names);
    model.params = std::move(lin);
    model.meta.n_rows = n;
    model.meta.timestamp = current_timestamp();
    return model;
}

TrainedModel fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                       double tol, std::int64_t max_iter, std::vector<std::string> names) {
    const Eigen::Index n = X.rows(), k = X.cols();
    if (y.size() != n) throw DataError("fit_lasso: X/y row mismatch");
    if (n < 2) throw DataError("fit_lasso needs at least 2 rows");
    if (alpha < 0) throw ConfigError("lasso alpha must be >= 0");
    if (max_iter < 1) throw ConfigError("lasso max_iter must be >= 1");
    names = default_feature_names(std::move(names), k);

    const Eigen::RowVectorXd mu = X.colwise().mean();
    Eigen::VectorXd sd = population_std(X, mu);
    Eigen::VectorXd safe_sd = sd;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (safe_sd(j) == 0.0) safe_sd(j) = 1.0; // constant column, coefficient stays 0
    }
    Eigen::MatrixXd Xs = (X.rowwise() - mu).array().rowwise() / safe_sd.transpose().array();
    const double y_mean = y.mean();
    Eigen::VectorXd yc = y.array() - y_mean;

    // Standardized columns satisfy x_j'x_j = n, so the coordinate update is a
    // plain soft threshold of rho_j = x_j'r/n + w_j.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd r = yc; // residual yc - Xs*w
    bool converged = false;
    const auto dn = static_cast<double>(n);
    for (std::int64_t sweep = 0; sweep < max_iter; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (sd(j) == 0.0) continue;
            const double rho = Xs.col(j).dot(r) / dn + w(j);
            const double wj = soft_threshold(rho, alpha);
            const double delta = wj - w(j);
            if (delta != 0.0) {
                r -= delta * Xs.col(j);
                w(j) = wj;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (max_delta < tol) {
            converged = true;
            break;
        }
    }

    LinearModel lin;
    lin.alpha = alpha;
    lin.converged = converged;
    lin.feature_std = sd;
    lin.coefficients = (w.array() / safe_sd.array()).matrix();
    lin.intercept = y_mean - lin.coefficients.dot(mu.transpose());

    TrainedModel model;
    model.spec.algorithm = Algorithm::lasso;
    model.spec.params["alpha"] = alpha;
    model.feature_names = std::move(names);
    model.meta.n_rows = n;
    model.meta.timestamp = current_timestamp();
    if (!converged) model.meta.warnings.push_back("lasso did not converge within max_iter sweeps");
    model.params = std::move(lin);
    return model;
}

TrainedModel fit_linear_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double c,
                            double epsilon, std::int64_t max_iter, double tol,
                            std::vector<std::string> names) {
    const Eigen::Index n = X.rows(), k = X.cols();
    if (y.size() != n) throw DataError("fit_linear_svr: X/y row mismatch");
    if (n < 1) throw DataError("fit_linear_svr needs at least 1 row");
    if (!(c > 0)) throw ConfigError("svr c must be > 0");
    if (epsilon < 0) throw ConfigError("svr epsilon must be >= 0");
    names = default_feature_names(std::move(names), k);

    const Eigen::RowVectorXd mu = X.colwise().mean();
    Eigen::VectorXd sd = population_std(X, mu);
    Eigen::VectorXd safe_sd = sd;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (safe_sd(j) == 0.0) safe_sd(j) = 1.0;
    }
    Eigen::MatrixXd Xs = (X.rowwise() - mu).array().rowwise() / safe_sd.transpose().array();

    // Scale the target to unit-ish magnitude; the objective transforms
    // exactly with c~ = c/y_scale, eps~ = eps/y_scale.
    const double y_mean = y.mean();
    double y_scale = std::sqrt((y.array() - y_mean).square().mean());
    if (y_scale == 0.0) y_scale = 1.0;
    const Eigen::VectorXd ys = (y.array() - y_mean) / y_scale;
    const double cs = c / y_scale;
    const double eps = epsilon / y_scale;

    const double y_lo = ys.minCoeff(), y_hi = ys.maxCoeff();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    double b = 0.5 * (y_lo + y_hi); // midrange start: optimal whenever the tube covers everything

    auto objective = [&](const Eigen::VectorXd& wv, double bv) {
        const Eigen::ArrayXd resid = (Xs * wv).array() + bv - ys.array();
        return 0.5 * wv.squaredNorm() + cs * (resid.abs() - eps).max(0.0).sum();
    };

    Eigen::VectorXd best_w = w;
    double best_b = b;
    double best_obj = objective(w, b);
    const double step_base = 2.0 / (1.0 + cs * static_cast<double>(n));
    const std::int64_t checkpoint = (3 * max_iter) / 4;
    double checkpoint_obj = best_obj;
    Eigen::VectorXd gw(k);
    for (std::int64_t t = 0; t < max_iter; ++t) {
        const Eigen::ArrayXd resid = (Xs * w).array() + b - ys.array();
        gw = w;
        double gb = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (resid(i) > eps) {
                gw += cs * Xs.row(i).transpose();
                gb += cs;
            } else if (resid(i) < -eps) {
                gw -= cs * Xs.row(i).transpose();
                gb -= cs;
            }
        }
        const double step = step_base / std::sqrt(static_cast<double>(t + 1));
        w -= step * gw;
        b -= step * gb;
        const double obj = objective(w, b);
        if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
            best_b = b;
        }
        if (t == checkpoint) checkpoint_obj = best_obj;
    }
    // Converged when the final quarter of the schedule no longer moved the
    // best objective materially.
    const bool converged = checkpoint_obj - best_obj <= tol * std::max(1.0, std::abs(best_obj));

    SvrModel svr;
    svr.feature_std = sd;
    svr.converged = converged;
    svr.coefficients = (y_scale * best_w.array() / safe_sd.array()).matrix();
    svr.intercept = y_mean + y_scale * best_b - svr.coefficients.dot(mu.transpose());

    TrainedModel model;
    model.spec.algorithm = Algorithm::linear_svr;
    model.spec.params["c"] = c;
    model.spec.params["epsilon"] = epsilon;
    model.feature_names = std::move(names);
    model.meta.n_rows = n;
    model.meta.timestamp = current_timestamp();
    if (!converged) {
        model.meta.warnings.push_back("svr subgradient descent hit max_iter; best iterate kept");
    }
    model.params = std::move(svr);
    return model;
}

} // namespace tabreg::models
