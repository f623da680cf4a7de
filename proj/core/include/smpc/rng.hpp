#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace smpc {

/// Name recorded in output files for the sampling pipeline below.
inline constexpr std::string_view kPrngName = "mt19937_64+marsaglia-polar";

/**
 * @brief Explicit random state passed in and out of sampling functions.
 *
 * Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
 * derives uniforms and normals with transforms implemented here so draws are
 * bit-identical across standard library implementations.
 */
class RngState {
public:
    explicit RngState(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal draw (Marsaglia polar method, second variate discarded).
    double standard_normal();

    friend bool operator==(const RngState&, const RngState&) = default;

private:
    std::mt19937_64 engine_;
};

}  // namespace smpc
