#include <atomic>
#include <cstdlib>
#include <string>

#include "skegtd/errors.hpp"
#include "skegtd/kernels.hpp"

namespace skegtd::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SKEGTD_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() noexcept {
    const bool avx = cpu_has_avx2();
    if (const char* env = std::getenv("SKEGTD_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && avx) return Isa::avx2;
    }
    return avx ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

inline bool use_avx2() noexcept { return current().load(std::memory_order_relaxed) == Isa::avx2; }

}  // namespace

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) noexcept { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() noexcept { return current().load(); }

void set_isa(Isa isa) {
    if (!isa_supported(isa)) throw DomainError("set_isa: instruction set not available on this CPU");
    current().store(isa);
}

void exp_batch(std::span<const double> in, std::span<double> out) {
    use_avx2() ? avx2::exp_batch(in, out) : scalar::exp_batch(in, out);
}

void log_batch(std::span<const double> in, std::span<double> out) {
    use_avx2() ? avx2::log_batch(in, out) : scalar::log_batch(in, out);
}

double sum_log1p_cexp(std::span<const double> L, double c, double beta) {
    return use_avx2() ? avx2::sum_log1p_cexp(L, c, beta) : scalar::sum_log1p_cexp(L, c, beta);
}

PowerSums weighted_power_sums(std::span<const double> L, std::span<const double> w, double beta) {
    return use_avx2() ? avx2::weighted_power_sums(L, w, beta) : scalar::weighted_power_sums(L, w, beta);
}

double estep_weights(std::span<const double> L, double c, double alpha, double beta, double a,
                     std::span<double> w_out) {
    return use_avx2() ? avx2::estep_weights(L, c, alpha, beta, a, w_out)
                      : scalar::estep_weights(L, c, alpha, beta, a, w_out);
}

CentralSums central_sums(std::span<const double> x, double center) {
    return use_avx2() ? avx2::central_sums(x, center) : scalar::central_sums(x, center);
}

LMomentSums lmoment_sums(std::span<const double> sorted) {
    return use_avx2() ? avx2::lmoment_sums(sorted) : scalar::lmoment_sums(sorted);
}

}  // namespace skegtd::kernels
