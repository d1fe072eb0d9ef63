#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace testutil {

struct MeanWithError {
    double mean = 0.0;
    double se = 0.0;
};

// Mean of f(t), t = 0..count-1, with a batch-means standard error that
// stays honest under serial correlation.
inline MeanWithError batch_mean(std::size_t count, const std::function<double(std::size_t)>& f,
                                std::size_t batches = 100) {
    const std::size_t size = count / batches;
    std::vector<double> means(batches, 0.0);
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t t = b * size; t < (b + 1) * size; ++t) s += f(t);
        means[b] = s / static_cast<double>(size);
        total += means[b];
    }
    MeanWithError out;
    out.mean = total / static_cast<double>(batches);
    double ss = 0.0;
    for (double m : means) ss += (m - out.mean) * (m - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
    return out;
}

}  // namespace testutil
