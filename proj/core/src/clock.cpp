#include "storyverb/clock.hpp"

#include <thread>

namespace storyverb {

Clock::duration SystemClock::now() const {
    return std::chrono::duration_cast<duration>(std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(duration d) {
    if (d.count() > 0) std::this_thread::sleep_for(d);
}

void SystemClock::sleep_until(duration t) {
    sleep_for(t - now());
}

Clock::duration ManualClock::now() const {
    std::lock_guard lock(mu_);
    return now_;
}

void ManualClock::sleep_for(duration d) {
    advance(d);
}

void ManualClock::sleep_until(duration t) {
    std::lock_guard lock(mu_);
    if (t > now_) now_ = t;
}

void ManualClock::advance(duration d) {
    std::lock_guard lock(mu_);
    if (d.count() > 0) now_ += d;
}

RateLimiter::RateLimiter(double requests_per_minute, Clock& clock)
    : clock_(clock),
      interval_(requests_per_minute > 0
                    ? Clock::duration(static_cast<Clock::duration::rep>(60'000.0 / requests_per_minute))
                    : Clock::duration(0)) {}

Clock::duration RateLimiter::acquire() {
    Clock::duration slot;
    {
        std::lock_guard lock(mu_);
        const auto now = clock_.now();
        if (!primed_ || next_slot_ < now) {
            next_slot_ = now;
            primed_ = true;
        }
        slot = next_slot_;
        next_slot_ += interval_;
    }
    clock_.sleep_until(slot);
    return slot;
}

}  // namespace storyverb
