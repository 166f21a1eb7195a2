// Free-space Poisson convolution on the moment grid via zero-padded radix-2
// FFT (Hockney-Eastwood): potential grids, 4th-order gradients, and the grid
// quadrature of the field-gradient tensor with its analytic far tail.
#ifndef VRL_POISSON_HPP
#define VRL_POISSON_HPP

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vrl/deposit.hpp"
#include "vrl/grid.hpp"

namespace vrl {

namespace fftdetail {

// Iterative in-place radix-2 FFT along contiguous data; sign = -1 forward.
inline void fft_line(std::complex<double>* a, int n, int sign,
                     const std::vector<std::complex<double>>& twiddle) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int stride = n / len;
        for (int i = 0; i < n; i += len)
            for (int k = 0; k < len / 2; ++k) {
                std::complex<double> w = twiddle[static_cast<std::size_t>(k) * stride];
                if (sign > 0) w = std::conj(w);
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
    }
}

inline int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

} // namespace fftdetail

// Average of 1/|r| over a unit cube centered at the origin (self-cell value of
// the discrete Green's function).
inline constexpr double kInverseRadiusCellAverage = 2.3800773640;
// int over R^3 minus the unit-half-extent cube of |r|^-4 dV (monopole tail of
// the field-square integrals).
inline constexpr double kCubeComplementR4 = 10.4450375281;

// Deconvolution of the deposition kernel: "deposited" keeps the C^2-smoothed
// sources; "point" divides by the B-spline transfer function to recover
// point-particle fields on the grid (requires bandwidth = 2h).
enum class SourceSharpening { deposited, point };

class PoissonSolver {
  public:
    explicit PoissonSolver(const UniformGrid& grid) : grid_(grid) {
        nx_ = fftdetail::next_pow2(2 * grid.nx - 1);
        ny_ = fftdetail::next_pow2(2 * grid.ny - 1);
        nz_ = fftdetail::next_pow2(2 * grid.nz - 1);
        build_twiddles();
        build_kernel();
    }

    const UniformGrid& grid() const { return grid_; }

    // phi(x) = sign * sum_y rho(y) / |x-y| h^3 as a discrete free-space
    // convolution; sign = -1 gives the gravity potential phi2, +1 the plasma
    // potential phi0 (E0 = -grad phi0).
    ScalarField potential(const ScalarField& rho, double sign,
                          SourceSharpening sharpen = SourceSharpening::deposited,
                          double bandwidth = 0.0) const {
        if (!rho.grid.same_geometry(grid_))
            throw std::invalid_argument("poisson: field grid mismatch");
        std::vector<std::complex<double>> work(pad_size(), 0.0);
        for (int i = 0; i < grid_.nx; ++i)
            for (int j = 0; j < grid_.ny; ++j)
                for (int k = 0; k < grid_.nz; ++k)
                    work[pad_index(i, j, k)] = rho.v[grid_.index(i, j, k)];
        fft3(work, -1);
        if (sharpen == SourceSharpening::point) {
            if (bandwidth <= 0.0 || std::abs(bandwidth - 2.0 * grid_.h) > 1e-12 * grid_.h)
                throw std::invalid_argument(
                    "poisson: point sharpening requires bandwidth = 2 h (B-spline transfer "
                    "function vanishes at Nyquist otherwise)");
            apply_deconvolution(work);
        }
        const double scale = sign * grid_.cell_volume() / static_cast<double>(pad_size());
        for (std::size_t m = 0; m < work.size(); ++m) work[m] *= kernel_hat_[m] * scale;
        fft3(work, +1);
        ScalarField phi(grid_, MomentKind::field);
        for (int i = 0; i < grid_.nx; ++i)
            for (int j = 0; j < grid_.ny; ++j)
                for (int k = 0; k < grid_.nz; ++k)
                    phi.v[grid_.index(i, j, k)] = work[pad_index(i, j, k)].real();
        return phi;
    }

    // 4th-order centered gradient, shifted one-sided at the two boundary layers.
    static VectorField gradient(const ScalarField& phi) {
        const UniformGrid& g = phi.grid;
        VectorField out(g, MomentKind::field);
        auto deriv = [&](int i, int j, int k, int axis) {
            const int n = axis == 0 ? g.nx : axis == 1 ? g.ny : g.nz;
            int c = axis == 0 ? i : axis == 1 ? j : k;
            int shift = 0;
            if (c < 2) shift = 2 - c;
            if (c > n - 3) shift = n - 3 - c;
            auto val = [&](int di) {
                int ii = i, jj = j, kk = k;
                (axis == 0 ? ii : axis == 1 ? jj : kk) += di + shift;
                return phi.v[g.index(ii, jj, kk)];
            };
            // 5-point first derivative at offset -shift within the stencil
            static const double tab[5][5] = {
                {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -1.0 / 4},   // node 0 of 0..4
                {-1.0 / 4, -5.0 / 6, 3.0 / 2, -1.0 / 2, 1.0 / 12},
                {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12}, // centered
                {-1.0 / 12, 1.0 / 2, -3.0 / 2, 5.0 / 6, 1.0 / 4},
                {1.0 / 4, -4.0 / 3, 3.0, -4.0, 25.0 / 12}};
            const int row = 2 - shift;
            double acc = 0.0;
            for (int m = 0; m < 5; ++m) acc += tab[row][m] * val(m - 2);
            return acc / g.h;
        };
        parallel_for(static_cast<std::size_t>(g.nx), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                for (int j = 0; j < g.ny; ++j)
                    for (int k = 0; k < g.nz; ++k) {
                        const std::size_t m = g.index(static_cast<int>(i), j, k);
                        out.vx[m] = deriv(static_cast<int>(i), j, k, 0);
                        out.vy[m] = deriv(static_cast<int>(i), j, k, 1);
                        out.vz[m] = deriv(static_cast<int>(i), j, k, 2);
                    }
        }, 1);
        return out;
    }

  private:
    std::size_t pad_size() const {
        return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_) *
               static_cast<std::size_t>(nz_);
    }
    std::size_t pad_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * ny_ + j) * nz_ + k;
    }

    void build_twiddles() {
        auto make = [](int n) {
            std::vector<std::complex<double>> t(n / 2);
            for (int k = 0; k < n / 2; ++k) {
                const double ang = -2.0 * std::numbers::pi * k / n;
                t[k] = {std::cos(ang), std::sin(ang)};
            }
            return t;
        };
        twx_ = make(nx_);
        twy_ = make(ny_);
        twz_ = make(nz_);
    }

    void build_kernel() {
        // 1/|d| with the wrapped displacement convention; self cell uses the
        // cell average of 1/r.
        std::vector<std::complex<double>> ker(pad_size());
        const double g0 = kInverseRadiusCellAverage / grid_.h;
        for (int i = 0; i < nx_; ++i) {
            const double dx = grid_.h * (i <= nx_ / 2 ? i : i - nx_);
            for (int j = 0; j < ny_; ++j) {
                const double dy = grid_.h * (j <= ny_ / 2 ? j : j - ny_);
                for (int k = 0; k < nz_; ++k) {
                    const double dz = grid_.h * (k <= nz_ / 2 ? k : k - nz_);
                    const double r2 = dx * dx + dy * dy + dz * dz;
                    ker[pad_index(i, j, k)] = r2 == 0.0 ? g0 : 1.0 / std::sqrt(r2);
                }
            }
        }
        fft3(ker, -1);
        kernel_hat_.resize(pad_size());
        for (std::size_t m = 0; m < ker.size(); ++m) kernel_hat_[m] = ker[m].real();
    }

    // Divide by the DFT of the node-sampled cubic B-spline {1/6, 2/3, 1/6}
    // per axis: (2 + cos theta) / 3, bounded below by 1/3 at Nyquist.
    void apply_deconvolution(std::vector<std::complex<double>>& data) const {
        auto transfer = [](int idx, int n) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(idx) / n;
            return (2.0 + std::cos(theta)) / 3.0;
        };
        std::vector<double> tx(nx_), ty(ny_), tz(nz_);
        for (int i = 0; i < nx_; ++i) tx[i] = transfer(i, nx_);
        for (int j = 0; j < ny_; ++j) ty[j] = transfer(j, ny_);
        for (int k = 0; k < nz_; ++k) tz[k] = transfer(k, nz_);
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j)
                for (int k = 0; k < nz_; ++k) data[pad_index(i, j, k)] /= tx[i] * ty[j] * tz[k];
    }

    void fft3(std::vector<std::complex<double>>& a, int sign) const {
        // z lines are contiguous
        const std::size_t nxy = static_cast<std::size_t>(nx_) * ny_;
        parallel_for(nxy, [&](std::size_t b, std::size_t e) {
            for (std::size_t m = b; m < e; ++m)
                fftdetail::fft_line(&a[m * nz_], nz_, sign, twz_);
        }, 8);
        // y lines: gather-scatter
        parallel_for(static_cast<std::size_t>(nx_) * nz_, [&](std::size_t b, std::size_t e) {
            std::vector<std::complex<double>> line(ny_);
            for (std::size_t m = b; m < e; ++m) {
                const int i = static_cast<int>(m / nz_);
                const int k = static_cast<int>(m % nz_);
                for (int j = 0; j < ny_; ++j) line[j] = a[pad_index(i, j, k)];
                fftdetail::fft_line(line.data(), ny_, sign, twy_);
                for (int j = 0; j < ny_; ++j) a[pad_index(i, j, k)] = line[j];
            }
        }, 64);
        // x lines
        parallel_for(static_cast<std::size_t>(ny_) * nz_, [&](std::size_t b, std::size_t e) {
            std::vector<std::complex<double>> line(nx_);
            for (std::size_t m = b; m < e; ++m) {
                const int j = static_cast<int>(m / nz_);
                const int k = static_cast<int>(m % nz_);
                for (int i = 0; i < nx_; ++i) line[i] = a[pad_index(i, j, k)];
                fftdetail::fft_line(line.data(), nx_, sign, twx_);
                for (int i = 0; i < nx_; ++i) a[pad_index(i, j, k)] = line[i];
            }
        }, 64);
    }

    UniformGrid grid_;
    int nx_, ny_, nz_;
    std::vector<double> kernel_hat_;
    std::vector<std::complex<double>> twx_, twy_, twz_;
};

// Grid quadrature of G = int grad_phi (x) grad_phi dy over the full grid cube
// plus the analytic monopole tail over the cube complement. total_mass feeds
// the tail model M^2 (I/3) C / L_eff; pass 0 to drop the tail.
inline SymTensor3 field_gradient_tensor_grid(const VectorField& gradphi, double total_mass) {
    const UniformGrid& g = gradphi.grid;
    SymTensor3 t{};
    for (std::size_t m = 0; m < gradphi.vx.size(); ++m) {
        const Vec3 v{gradphi.vx[m], gradphi.vy[m], gradphi.vz[m]};
        SymTensor3 o = SymTensor3::outer(v);
        t += o;
    }
    t *= g.cell_volume();
    if (total_mass != 0.0) {
        // node-centered cells extend h/2 beyond the outermost nodes
        const double lx = 0.5 * g.h * (g.nx - 1) + 0.5 * g.h;
        const double l_eff = lx; // cubic grids assumed for the tail model
        const double tail = total_mass * total_mass * kCubeComplementR4 / (3.0 * l_eff);
        t += SymTensor3::identity(tail);
    }
    return t;
}

} // namespace vrl

#endif // VRL_POISSON_HPP
