#include "ptkr/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

#include "ptkr/errors.hpp"

namespace ptkr {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Eigen::VectorXcd& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

}  // namespace

struct SpectralTransform::Plans {
  fftw_plan backward = nullptr;  // exp(+i k j 2pi/N): momentum -> angle
  fftw_plan forward = nullptr;   // exp(-i k j 2pi/N): angle -> momentum

  explicit Plans(int n) {
    // FFTW_ESTIMATE keeps plan selection independent of timing, so repeated
    // runs produce bit-identical output.
    Eigen::VectorXcd scratch = Eigen::VectorXcd::Zero(n);
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    backward = fftw_plan_dft_1d(n, as_fftw(scratch), as_fftw(scratch), FFTW_BACKWARD, flags);
    forward = fftw_plan_dft_1d(n, as_fftw(scratch), as_fftw(scratch), FFTW_FORWARD, flags);
    if (backward == nullptr || forward == nullptr) throw Error("fft_plan", "FFTW planning failed");
  }

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(backward);
    fftw_destroy_plan(forward);
  }

  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

SpectralTransform::SpectralTransform(int n_modes) : n_(n_modes) {
  if (n_modes < 2 || n_modes % 2 != 0) throw InvalidArgument("transform size must be even");
  static std::mutex cache_mutex;
  static std::map<int, std::weak_ptr<const Plans>> cache;
  {
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[n_modes];
    plans_ = slot.lock();
    if (!plans_) {
      plans_ = std::make_shared<const Plans>(n_modes);
      slot = plans_;
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_modes));
  const int half = n_modes / 2;
  auto msign = std::make_shared<Eigen::VectorXd>(n_modes);
  auto asign = std::make_shared<Eigen::VectorXd>(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    const int n = k - half;
    (*msign)(k) = (n % 2 == 0) ? scale : -scale;
    (*asign)(k) = (k % 2 == 0) ? 1.0 : -1.0;
  }
  momentum_sign_ = std::move(msign);
  angle_sign_ = std::move(asign);
}

void SpectralTransform::to_angle(Eigen::VectorXcd& amplitudes) const {
  if (amplitudes.size() != n_) throw InvalidArgument("transform: amplitude length mismatch");
  amplitudes.array() *= momentum_sign_->array();
  fftw_execute_dft(plans_->backward, as_fftw(amplitudes), as_fftw(amplitudes));
  amplitudes.array() *= angle_sign_->array();
}

void SpectralTransform::to_momentum(Eigen::VectorXcd& amplitudes) const {
  if (amplitudes.size() != n_) throw InvalidArgument("transform: amplitude length mismatch");
  amplitudes.array() *= angle_sign_->array();
  fftw_execute_dft(plans_->forward, as_fftw(amplitudes), as_fftw(amplitudes));
  amplitudes.array() *= momentum_sign_->array();
}

}  // namespace ptkr
