#pragma once

#include <chrono>
#include <mutex>

namespace storyverb {

class Clock {
public:
    using duration = std::chrono::milliseconds;
    virtual ~Clock() = default;
    virtual duration now() const = 0;
    virtual void sleep_for(duration d) = 0;
    virtual void sleep_until(duration t) = 0;
};

class SystemClock : public Clock {
public:
    duration now() const override;
    void sleep_for(duration d) override;
    void sleep_until(duration t) override;
};

// Time only moves when someone sleeps. Thread-safe.
class ManualClock : public Clock {
public:
    duration now() const override;
    void sleep_for(duration d) override;
    // Moves time forward to t; never backwards.
    void sleep_until(duration t) override;
    void advance(duration d);

private:
    mutable std::mutex mu_;
    duration now_{0};
};

// Evenly paced slots: at most `requests_per_minute` acquisitions per minute.
// A rate of 0 disables pacing.
class RateLimiter {
public:
    RateLimiter(double requests_per_minute, Clock& clock);
    // Blocks (via the clock) until the caller's slot; returns the slot time.
    Clock::duration acquire();

private:
    Clock& clock_;
    Clock::duration interval_;
    std::mutex mu_;
    Clock::duration next_slot_{0};
    bool primed_ = false;
};

}  // namespace storyverb
