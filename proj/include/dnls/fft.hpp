#pragma once

#include <Eigen/Core>
#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace dnls::detail {

template <typename Real>
struct FftwApi;

template <>
struct FftwApi<double> {
  using Plan = fftw_plan;
  using Complex = fftw_complex;
  static Plan make(int n, Complex* in, Complex* out, int sign, unsigned flags) {
    return fftw_plan_dft_1d(n, in, out, sign, flags);
  }
  static void execute(Plan p, Complex* in, Complex* out) { fftw_execute_dft(p, in, out); }
  static void destroy(Plan p) { fftw_destroy_plan(p); }
  static void make_planner_thread_safe() { fftw_make_planner_thread_safe(); }
};

template <>
struct FftwApi<float> {
  using Plan = fftwf_plan;
  using Complex = fftwf_complex;
  static Plan make(int n, Complex* in, Complex* out, int sign, unsigned flags) {
    return fftwf_plan_dft_1d(n, in, out, sign, flags);
  }
  static void execute(Plan p, Complex* in, Complex* out) { fftwf_execute_dft(p, in, out); }
  static void destroy(Plan p) { fftwf_destroy_plan(p); }
  static void make_planner_thread_safe() { fftwf_make_planner_thread_safe(); }
};

// Per-thread cache of FFTW plans. Plans are created with FFTW_UNALIGNED so
// they can be executed on any Eigen buffer of the planned size.
template <typename Real>
class FftPlanCache {
  using Api = FftwApi<Real>;

 public:
  FftPlanCache() = default;
  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) Api::destroy(plan);
  }

  // out[k] = sum_n in[n] exp(-2 pi i n k / n_points)
  void forward(const std::complex<Real>* in, std::complex<Real>* out, Eigen::Index n) {
    execute(in, out, n, FFTW_FORWARD);
  }

  // out[n] = sum_k in[k] exp(+2 pi i n k / n_points), no 1/n scaling
  void backward(const std::complex<Real>* in, std::complex<Real>* out, Eigen::Index n) {
    execute(in, out, n, FFTW_BACKWARD);
  }

 private:
  void execute(const std::complex<Real>* in, std::complex<Real>* out, Eigen::Index n, int sign) {
    auto* fin = reinterpret_cast<typename Api::Complex*>(const_cast<std::complex<Real>*>(in));
    auto* fout = reinterpret_cast<typename Api::Complex*>(out);
    const auto key = std::make_tuple(static_cast<int>(n), sign, in == out);
    auto it = plans_.find(key);
    if (it == plans_.end()) {
      auto plan = Api::make(static_cast<int>(n), fin, fout, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
      if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
      it = plans_.emplace(key, plan).first;
    }
    Api::execute(it->second, fin, fout);
  }

  std::map<std::tuple<int, int, bool>, typename Api::Plan> plans_;
};

template <typename Real>
FftPlanCache<Real>& fft_plans() {
  static std::once_flag once;
  std::call_once(once, [] { FftwApi<Real>::make_planner_thread_safe(); });
  thread_local FftPlanCache<Real> cache;
  return cache;
}

template <typename Real>
Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1> fft_forward(
    const Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1>& in) {
  Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1> out(in.size());
  fft_plans<Real>().forward(in.data(), out.data(), in.size());
  return out;
}

template <typename Real>
Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1> fft_backward(
    const Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1>& in) {
  Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1> out(in.size());
  fft_plans<Real>().backward(in.data(), out.data(), in.size());
  return out;
}

}  // namespace dnls::detail
