#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include <memory>
#include <span>
#include <vector>

#include "pingpong/errors.hpp"

namespace pingpong {

/// Natural cubic spline through strictly increasing nodes (GSL backend).
///
/// Copies share the immutable interpolation tables, and evaluation does not
/// use an accelerator, so one instance may be evaluated from several threads.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) throw DomainError("spline: abscissa/ordinate size mismatch");
    if (x.size() < 4) throw DomainError("spline: at least 4 nodes are required");
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) throw DomainError("spline: nodes must be strictly increasing");
    }
    auto data = std::make_shared<Data>();
    data->x = std::move(x);
    data->y = std::move(y);
    data->interp.reset(gsl_interp_alloc(gsl_interp_cspline, data->x.size()));
    gsl_set_error_handler_off();
    if (gsl_interp_init(data->interp.get(), data->x.data(), data->y.data(), data->x.size()) !=
        GSL_SUCCESS) {
      throw NumericalError("spline: GSL initialisation failed");
    }
    data_ = std::move(data);
  }

  /// Value inside [front(), back()]; callers handle extrapolation.
  double operator()(double t) const {
    return gsl_interp_eval(data_->interp.get(), data_->x.data(), data_->y.data(), t, nullptr);
  }

  double derivative(double t) const {
    return gsl_interp_eval_deriv(data_->interp.get(), data_->x.data(), data_->y.data(), t,
                                 nullptr);
  }

  double front() const { return data_->x.front(); }
  double back() const { return data_->x.back(); }
  std::span<const double> nodes() const { return data_->x; }
  std::span<const double> values() const { return data_->y; }

 private:
  struct InterpDeleter {
    void operator()(gsl_interp* p) const { gsl_interp_free(p); }
  };
  struct Data {
    std::vector<double> x;
    std::vector<double> y;
    std::unique_ptr<gsl_interp, InterpDeleter> interp;
  };
  std::shared_ptr<const Data> data_;
};

}  // namespace pingpong
