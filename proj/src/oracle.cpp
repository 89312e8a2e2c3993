#include "tensoraux/errors.hpp"
#include "tensoraux/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace tensoraux {

namespace {

constexpr Index kDenseLimit = 10;

void require(bool ok, const char* what) {
  if (!ok) throw ContractViolation(what);
}

void require_dim(const Vector& x, Index n) {
  if (x.size() != n) throw ContractViolation("oracle evaluated at a point of wrong dimension");
}

std::vector<double> dense_from(Index n, const std::function<double(Index, Index, Index)>& entry) {
  std::vector<double> e(static_cast<std::size_t>(n * n * n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) e[static_cast<std::size_t>((i * n + j) * n + k)] = entry(i, j, k);
  return e;
}

class Quadratic final : public ThirdOrderOracle {
 public:
  Quadratic(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {}

  Index dim() const override { return b_.size(); }
  std::string name() const override { return "quadratic"; }
  double value(const Vector& x) const override {
    require_dim(x, dim());
    return 0.5 * x.dot(A_ * x) + b_.dot(x);
  }
  Vector gradient(const Vector& x) const override {
    require_dim(x, dim());
    return A_ * x + b_;
  }
  SymForm2 hessian(const Vector& x) const override {
    require_dim(x, dim());
    return A_;
  }
  SymForm3 third(const Vector& x) const override {
    require_dim(x, dim());
    return SymForm3::zero(dim());
  }
  HolderInfo holder() const override { return {1.0, 0.0}; }

 private:
  Matrix A_;
  Vector b_;
};

class SeparableQuartic final : public ThirdOrderOracle {
 public:
  explicit SeparableQuartic(Vector a) : a_(std::move(a)) {}

  Index dim() const override { return a_.size(); }
  std::string name() const override { return "separable_quartic"; }
  double value(const Vector& x) const override {
    require_dim(x, dim());
    return 0.25 * (a_.array() * x.array().pow(4)).sum();
  }
  Vector gradient(const Vector& x) const override {
    require_dim(x, dim());
    return a_.array() * x.array().cube();
  }
  SymForm2 hessian(const Vector& x) const override {
    require_dim(x, dim());
    return (3.0 * a_.array() * x.array().square()).matrix().asDiagonal();
  }
  SymForm3 third(const Vector& x) const override {
    require_dim(x, dim());
    const Vector coef = 6.0 * a_.array() * x.array();
    auto form = SymForm3::from_action(dim(), [coef](const Vector& h) {
      return Matrix((coef.array() * h.array()).matrix().asDiagonal());
    });
    if (dim() <= kDenseLimit) {
      form = form.with_dense(dense_from(dim(), [&](Index i, Index j, Index k) {
        return (i == j && j == k) ? coef(i) : 0.0;
      }));
    }
    return form;
  }
  HolderInfo holder() const override { return {1.0, 6.0 * a_.maxCoeff()}; }

 private:
  Vector a_;
};

class LogSumExp final : public ThirdOrderOracle {
 public:
  LogSumExp(Matrix A, Vector b, double scale) : A_(std::move(A)), b_(std::move(b)), scale_(scale) {
    const double max_row = A_.rowwise().norm().maxCoeff();
    H_f_ = 4.0 * std::pow(max_row, 4) / std::pow(scale_, 3);
  }

  Index dim() const override { return A_.cols(); }
  std::string name() const override { return "log_sum_exp"; }

  double value(const Vector& x) const override {
    require_dim(x, dim());
    const Vector z = (A_ * x - b_) / scale_;
    const double zmax = z.maxCoeff();
    return scale_ * (zmax + std::log((z.array() - zmax).exp().sum()));
  }
  Vector gradient(const Vector& x) const override { return A_.transpose() * softmax(x); }
  SymForm2 hessian(const Vector& x) const override {
    const Vector p = softmax(x);
    const Matrix S = Matrix(p.asDiagonal()) - p * p.transpose();
    return A_.transpose() * S * A_ / scale_;
  }
  SymForm3 third(const Vector& x) const override {
    const Vector p = softmax(x);
    const Matrix A = A_;
    const double inv = 1.0 / (scale_ * scale_);
    auto form = SymForm3::from_action(dim(), [A, p, inv](const Vector& h) {
      const Vector a = A * h;
      const Vector pa = p.cwiseProduct(a);
      const double m = p.dot(a);
      Matrix Z = Matrix(pa.asDiagonal()) - m * Matrix(p.asDiagonal()) - pa * p.transpose() -
                 p * pa.transpose() + 2.0 * m * p * p.transpose();
      return Matrix(inv * A.transpose() * Z * A);
    });
    if (dim() <= kDenseLimit) {
      // Third cumulant of the row vector entries under p.
      const Matrix& M = A_;
      const Vector mean = M.transpose() * p;  // E[A_i]
      form = form.with_dense(dense_from(dim(), [&](Index i, Index j, Index k) {
        double e3 = 0.0, eij = 0.0, eik = 0.0, ejk = 0.0;
        for (Index r = 0; r < M.rows(); ++r) {
          e3 += p(r) * M(r, i) * M(r, j) * M(r, k);
          eij += p(r) * M(r, i) * M(r, j);
          eik += p(r) * M(r, i) * M(r, k);
          ejk += p(r) * M(r, j) * M(r, k);
        }
        return inv * (e3 - eij * mean(k) - eik * mean(j) - ejk * mean(i) + 2.0 * mean(i) * mean(j) * mean(k));
      }));
    }
    return form;
  }
  HolderInfo holder() const override { return {1.0, H_f_}; }

 private:
  Vector softmax(const Vector& x) const {
    require_dim(x, dim());
    const Vector z = (A_ * x - b_) / scale_;
    Vector p = (z.array() - z.maxCoeff()).exp();
    return p / p.sum();
  }

  Matrix A_;
  Vector b_;
  double scale_;
  double H_f_ = 0.0;
};

// Logistic loss l(t) = log(1 + exp(-t)) and its derivatives via s = sigma(t).
struct LogisticTerms {
  double loss, d1, d2, d3;
};

LogisticTerms logistic_terms(double t) {
  const double s = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
  const double sc = t >= 0.0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));  // 1 - s
  const double loss = t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
  return {loss, -sc, s * sc, s * sc * (sc - s)};
}

class Logistic final : public ThirdOrderOracle {
 public:
  Logistic(Dataset data, double reg) : data_(std::move(data)), reg_(reg) {
    const double m = static_cast<double>(data_.features.rows());
    H_f_ = data_.features.rowwise().squaredNorm().array().square().sum() / (8.0 * m);
  }

  Index dim() const override { return data_.features.cols(); }
  std::string name() const override { return "logistic"; }

  double value(const Vector& x) const override {
    require_dim(x, dim());
    const Vector t = margins(x);
    double sum = 0.0;
    for (Index i = 0; i < t.size(); ++i) sum += logistic_terms(t(i)).loss;
    return sum / samples() + 0.5 * reg_ * x.squaredNorm();
  }
  Vector gradient(const Vector& x) const override {
    require_dim(x, dim());
    const Vector t = margins(x);
    Vector w(t.size());
    for (Index i = 0; i < t.size(); ++i) w(i) = logistic_terms(t(i)).d1 * data_.labels(i);
    return data_.features.transpose() * w / samples() + reg_ * x;
  }
  SymForm2 hessian(const Vector& x) const override {
    require_dim(x, dim());
    const Vector t = margins(x);
    Vector w(t.size());
    for (Index i = 0; i < t.size(); ++i) w(i) = logistic_terms(t(i)).d2;
    const Matrix& A = data_.features;
    return A.transpose() * w.asDiagonal() * A / samples() +
           reg_ * Matrix::Identity(dim(), dim());
  }
  SymForm3 third(const Vector& x) const override {
    require_dim(x, dim());
    const Vector t = margins(x);
    Vector w(t.size());
    for (Index i = 0; i < t.size(); ++i) w(i) = logistic_terms(t(i)).d3 * data_.labels(i) / samples();
    const Matrix A = data_.features;
    auto form = SymForm3::from_action(dim(), [A, w](const Vector& h) {
      const Vector weights = w.cwiseProduct(A * h);
      return Matrix(A.transpose() * weights.asDiagonal() * A);
    });
    if (dim() <= kDenseLimit) {
      form = form.with_dense(dense_from(dim(), [&](Index i, Index j, Index k) {
        double sum = 0.0;
        for (Index r = 0; r < A.rows(); ++r) sum += w(r) * A(r, i) * A(r, j) * A(r, k);
        return sum;
      }));
    }
    return form;
  }
  HolderInfo holder() const override { return {1.0, H_f_}; }

 private:
  double samples() const { return static_cast<double>(data_.features.rows()); }
  Vector margins(const Vector& x) const { return data_.labels.cwiseProduct(data_.features * x); }

  Dataset data_;
  double reg_;
  double H_f_ = 0.0;
};

class HolderOverride final : public ThirdOrderOracle {
 public:
  HolderOverride(OraclePtr inner, HolderInfo holder) : inner_(std::move(inner)), holder_(holder) {}

  Index dim() const override { return inner_->dim(); }
  std::string name() const override { return inner_->name(); }
  double value(const Vector& x) const override { return inner_->value(x); }
  Vector gradient(const Vector& x) const override { return inner_->gradient(x); }
  SymForm2 hessian(const Vector& x) const override { return inner_->hessian(x); }
  SymForm3 third(const Vector& x) const override { return inner_->third(x); }
  HolderInfo holder() const override { return holder_; }

 private:
  OraclePtr inner_;
  HolderInfo holder_;
};

}  // namespace

OraclePtr make_quadratic(Matrix A, Vector b) {
  require(A.rows() == A.cols() && A.rows() == b.size() && b.size() >= 1, "quadratic: dimension mismatch");
  require(A.allFinite() && b.allFinite(), "quadratic: non-finite parameters");
  require(is_symmetric(A), "quadratic: A is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  require(eig.eigenvalues()(0) >= -1e-12 * scale, "quadratic: A is not positive semidefinite");
  return std::make_shared<Quadratic>(std::move(A), std::move(b));
}

OraclePtr make_separable_quartic(Vector a) {
  require(a.size() >= 1 && a.allFinite(), "separable_quartic: invalid coefficients");
  require(a.minCoeff() >= 0.0, "separable_quartic: coefficients must be nonnegative");
  return std::make_shared<SeparableQuartic>(std::move(a));
}

OraclePtr make_log_sum_exp(Matrix A, Vector b, double scale) {
  require(A.rows() >= 1 && A.cols() >= 1 && A.rows() == b.size(), "log_sum_exp: dimension mismatch");
  require(A.allFinite() && b.allFinite(), "log_sum_exp: non-finite parameters");
  require(std::isfinite(scale) && scale > 0.0, "log_sum_exp: scale must be positive");
  return std::make_shared<LogSumExp>(std::move(A), std::move(b), scale);
}

OraclePtr make_logistic(Dataset data, double reg) {
  require(data.features.rows() >= 1 && data.features.cols() >= 1, "logistic: empty dataset");
  require(data.labels.size() == data.features.rows(), "logistic: label count mismatch");
  require(data.features.allFinite(), "logistic: non-finite features");
  for (Index i = 0; i < data.labels.size(); ++i) {
    require(data.labels(i) == 1.0 || data.labels(i) == -1.0, "logistic: labels must be -1 or +1");
  }
  require(std::isfinite(reg) && reg >= 0.0, "logistic: regularization must be nonnegative");
  return std::make_shared<Logistic>(std::move(data), reg);
}

OraclePtr with_holder(OraclePtr inner, HolderInfo holder) {
  require(static_cast<bool>(inner), "with_holder: null oracle");
  require(holder.nu >= 0.0 && holder.nu <= 1.0, "holder exponent must lie in [0, 1]");
  require(std::isfinite(holder.H_f) && holder.H_f >= 0.0, "holder constant must be nonnegative");
  return std::make_shared<HolderOverride>(std::move(inner), holder);
}

}  // namespace tensoraux
