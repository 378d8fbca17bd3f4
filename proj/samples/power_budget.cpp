// Print the projected acquisition power savings for a sweep of compression
// ratios, for a receiver whose full-rate front end samples at 200 MS/s.
#include <cstdio>

#include "specsense/metrics.hpp"

int main() {
    using namespace specsense;
    const double nyquist_hz = 200e6;
    std::printf("%8s %12s %12s %14s\n", "ratio", "rate (MS/s)", "rate factor",
                "power factor");
    for (const double ratio : {0.05, 0.08, 0.1, 0.2, 0.3, 0.5, 1.0}) {
        const PowerSavingsReport r = power_savings_report(nyquist_hz, ratio);
        std::printf("%8.2f %12.1f %12.2f %14.2f\n", ratio,
                    r.effective_rate_hz / 1e6, r.rate_reduction_factor,
                    r.power_reduction_factor);
    }
    return 0;
}
