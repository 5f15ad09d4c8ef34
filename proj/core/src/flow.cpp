#include "storyverb/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace storyverb {

namespace {

struct Offset {
    int dx;
    int dy;
};

// All displacements in the window, nearest first.
std::vector<Offset> search_order(int radius) {
    std::vector<Offset> order;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) order.push_back({dx, dy});
    std::stable_sort(order.begin(), order.end(), [](const Offset& a, const Offset& b) {
        return a.dx * a.dx + a.dy * a.dy < b.dx * b.dx + b.dy * b.dy;
    });
    return order;
}

// Sum of absolute differences, abandoned once it exceeds `limit`.
long block_sad(const Frame& prev, const Frame& next, int x0, int y0, int dx, int dy, int block,
               long limit) {
    long sad = 0;
    for (int y = 0; y < block; ++y) {
        const std::uint8_t* a = &prev.luma[static_cast<std::size_t>(y0 + y) * prev.width + x0];
        const std::uint8_t* b = &next.luma[static_cast<std::size_t>(y0 + y + dy) * next.width + x0 + dx];
        for (int x = 0; x < block; ++x) sad += std::abs(static_cast<int>(a[x]) - static_cast<int>(b[x]));
        if (sad > limit) return sad;
    }
    return sad;
}

}  // namespace

double BlockMatchingFlow::estimate(const Frame& prev, const Frame& next) const {
    if (prev.width != next.width || prev.height != next.height) {
        throw std::invalid_argument("frame dimensions differ: " + std::to_string(prev.width) + "x" +
                                    std::to_string(prev.height) + " vs " + std::to_string(next.width) +
                                    "x" + std::to_string(next.height));
    }
    const int block = std::min({params_.block, prev.width, prev.height});
    if (block <= 0) return 0.0;
    const int radius = params_.radius;
    static thread_local int cached_radius = -1;
    static thread_local std::vector<Offset> order;
    if (cached_radius != radius) {
        order = search_order(radius);
        cached_radius = radius;
    }
    const double unmatched = radius * std::sqrt(2.0);
    const long tolerance = static_cast<long>(params_.match_tolerance * 255.0 * block * block);

    const int bx = prev.width / block;
    const int by = prev.height / block;
    double total = 0.0;
    for (int j = 0; j < by; ++j) {
        for (int i = 0; i < bx; ++i) {
            const int x0 = i * block;
            const int y0 = j * block;
            long best = -1;
            Offset best_off{0, 0};
            for (const Offset& o : order) {
                if (x0 + o.dx < 0 || y0 + o.dy < 0 || x0 + o.dx + block > next.width ||
                    y0 + o.dy + block > next.height)
                    continue;
                const long limit = best < 0 ? std::numeric_limits<long>::max() : best - 1;
                const long sad = block_sad(prev, next, x0, y0, o.dx, o.dy, block, limit);
                if (best < 0 || sad < best) {
                    best = sad;
                    best_off = o;
                    if (best == 0) break;
                }
            }
            if (best > tolerance) {
                total += unmatched;
            } else {
                total += std::hypot(best_off.dx, best_off.dy);
            }
        }
    }
    const int blocks = bx * by;
    return blocks > 0 ? params_.scale * total / blocks : 0.0;
}

FlowScore estimate_flow(const Frame& prev, const Frame& next, const FlowEstimator& estimator) {
    if (prev.width != next.width || prev.height != next.height) {
        throw std::invalid_argument("frame dimensions differ");
    }
    const double s = estimator.estimate(prev, next);
    return {next.index, std::max(0.0, s)};
}

FlowScore estimate_flow(const Frame& prev, const Frame& next) {
    static const BlockMatchingFlow kDefault;
    return estimate_flow(prev, next, kDefault);
}

}  // namespace storyverb
