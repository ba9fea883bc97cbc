#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and an AVX2 variant; the dispatcher picks one at runtime
// from CPUID (overridable through set_isa or SKEGTD_SIMD=scalar|avx2).
// Results agree up to floating-point reassociation, which the equivalence
// tests bound.

#include <span>
#include <string_view>

namespace skegtd::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
Isa active_isa() noexcept;
/// Forces an ISA for subsequent calls. Throws DomainError if unsupported.
void set_isa(Isa isa);

struct PowerSums {
    double s0;  ///< sum w_i exp(beta L_i)
    double s1;  ///< sum w_i L_i exp(beta L_i)
};

struct CentralSums {
    double m2;  ///< sum (x - c)^2
    double m3;
    double m4;
};

struct LMomentSums {
    double b;  ///< sum b_{i,n} x_(i)
    double c;  ///< sum c_{i,n} x_(i)
    double d;  ///< sum d_{i,n} x_(i)
};

// Element-wise transcendental batches (exposed mainly for the equivalence
// tests; the fused kernels below use the same vector code).
void exp_batch(std::span<const double> in, std::span<double> out);
void log_batch(std::span<const double> in, std::span<double> out);

/// sum_i log1p(c * exp(beta * L_i)); L_i = -inf contributes 0.
double sum_log1p_cexp(std::span<const double> L, double c, double beta);

/// Weighted power sums of exp(beta * L_i). An empty `w` means unit weights.
PowerSums weighted_power_sums(std::span<const double> L, std::span<const double> w, double beta);

/// E-step weights for one sign group: b_i = alpha (1 + c exp(beta L_i)),
/// w_out[i] = a / b_i. Returns sum_i log b_i.
double estep_weights(std::span<const double> L, double c, double alpha, double beta, double a,
                     std::span<double> w_out);

CentralSums central_sums(std::span<const double> x, double center);

/// Sample L-moment weight sums over sorted data x_(1) <= ... <= x_(n).
LMomentSums lmoment_sums(std::span<const double> sorted);

// Direct access to each implementation, for equivalence testing.
namespace scalar {
void exp_batch(std::span<const double> in, std::span<double> out);
void log_batch(std::span<const double> in, std::span<double> out);
double sum_log1p_cexp(std::span<const double> L, double c, double beta);
PowerSums weighted_power_sums(std::span<const double> L, std::span<const double> w, double beta);
double estep_weights(std::span<const double> L, double c, double alpha, double beta, double a,
                     std::span<double> w_out);
CentralSums central_sums(std::span<const double> x, double center);
LMomentSums lmoment_sums(std::span<const double> sorted);
}  // namespace scalar

namespace avx2 {
void exp_batch(std::span<const double> in, std::span<double> out);
void log_batch(std::span<const double> in, std::span<double> out);
double sum_log1p_cexp(std::span<const double> L, double c, double beta);
PowerSums weighted_power_sums(std::span<const double> L, std::span<const double> w, double beta);
double estep_weights(std::span<const double> L, double c, double alpha, double beta, double a,
                     std::span<double> w_out);
CentralSums central_sums(std::span<const double> x, double center);
LMomentSums lmoment_sums(std::span<const double> sorted);
}  // namespace avx2

}  // namespace skegtd::kernels
