#include "threewave/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace threewave {

namespace {

// One RODFT00 plan per size, created under a lock (fftw planning is not
// thread safe; execution on caller buffers is).  FFTW_ESTIMATE keeps the
// chosen algorithm deterministic across runs.
class PlanCache {
  public:
    static fftw_plan get(int n) {
        static PlanCache cache;
        std::lock_guard<std::mutex> lk(cache.mu_);
        auto it = cache.plans_.find(n);
        if (it != cache.plans_.end()) return it->second;
        std::vector<double> probe(n, 0.0);
        fftw_plan p = fftw_plan_r2r_1d(n, probe.data(), probe.data(), FFTW_RODFT00,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.plans_.emplace(n, p);
        return p;
    }

  private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [n, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mu_;
    std::map<int, fftw_plan> plans_;
};

// raw unnormalized DST-I in place: y_k = 2 sum_j x_j sin(pi (j+1)(k+1)/(n+1))
void dst_raw(int n, double* x) {
    fftw_execute_r2r(PlanCache::get(n), x, x);
}

}  // namespace

Field sine_transform(const RadialGrid& g, const Field& v) {
    if ((int)v.size() != g.n) throw Error("sine_transform: size mismatch");
    Field c = v;
    dst_raw(g.n, c.data());
    const double scale = 1.0 / (g.n + 1);
    for (double& x : c) x *= scale;
    return c;
}

Field sine_transform_inverse(const RadialGrid& g, const Field& c) {
    if ((int)c.size() != g.n) throw Error("sine_transform_inverse: size mismatch");
    Field v = c;
    dst_raw(g.n, v.data());
    for (double& x : v) x *= 0.5;
    return v;
}

Field radial_laplacian(const RadialGrid& g, const Field& u) {
    if ((int)u.size() != g.n) throw Error("radial_laplacian: size mismatch");
    Field v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = g.r[i] * u[i];
    dst_raw(g.n, v.data());
    const double k0 = std::numbers::pi / g.R;
    const double scale = 0.5 / (g.n + 1);
    for (int k = 0; k < g.n; ++k) {
        const double kk = (k + 1) * k0;
        v[k] *= -kk * kk * scale;
    }
    dst_raw(g.n, v.data());
    for (int i = 0; i < g.n; ++i) v[i] /= g.r[i];
    return v;
}

Field solve_shifted_laplacian(const RadialGrid& g, const Field& u, double shift) {
    if ((int)u.size() != g.n) throw Error("solve_shifted_laplacian: size mismatch");
    if (shift <= 0) throw Error("solve_shifted_laplacian: shift must be positive");
    Field v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = g.r[i] * u[i];
    dst_raw(g.n, v.data());
    const double k0 = std::numbers::pi / g.R;
    const double scale = 0.5 / (g.n + 1);
    for (int k = 0; k < g.n; ++k) {
        const double kk = (k + 1) * k0;
        v[k] *= scale / (shift + kk * kk);
    }
    dst_raw(g.n, v.data());
    for (int i = 0; i < g.n; ++i) v[i] /= g.r[i];
    return v;
}

void free_propagate(const RadialGrid& g, CField& psi, double dt) {
    if ((int)psi.size() != g.n) throw Error("free_propagate: size mismatch");
    const int n = g.n;
    std::vector<double> re(n), im(n);
    for (int i = 0; i < n; ++i) {
        re[i] = g.r[i] * psi[i].real();
        im[i] = g.r[i] * psi[i].imag();
    }
    dst_raw(n, re.data());
    dst_raw(n, im.data());
    const double k0 = std::numbers::pi / g.R;
    const double scale = 0.5 / (n + 1);
    for (int k = 0; k < n; ++k) {
        const double kk = (k + 1) * k0;
        const double phase = -kk * kk * dt;  // i d/dt psi = -Lap psi
        const double cs = std::cos(phase) * scale, sn = std::sin(phase) * scale;
        const double a = re[k], b = im[k];
        re[k] = a * cs - b * sn;
        im[k] = a * sn + b * cs;
    }
    dst_raw(n, re.data());
    dst_raw(n, im.data());
    for (int i = 0; i < n; ++i) psi[i] = std::complex<double>(re[i], im[i]) / g.r[i];
}

}  // namespace threewave
