#include "smpc/rng.hpp"

#include <cmath>

namespace smpc {

double RngState::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngState::standard_normal()
{
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

}  // namespace smpc
