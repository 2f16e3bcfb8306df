#pragma once

// Sliding-window UCB1 over operator-ratio actions.

#include <cstddef>
#include <deque>
#include <vector>

#include "dde/variation.hpp"

namespace dde {

// The nine [xover:line:iso] mixes used by default.
std::vector<OperatorRatios> default_bandit_actions();

struct BanditRecord {
    std::size_t action;
    double reward;
};

class BanditState {
public:
    explicit BanditState(std::vector<OperatorRatios> actions, std::size_t window_length = 1000);

    // Untried actions (no record in the window) first, lowest index first;
    // otherwise argmax of Q(a) + sqrt(2 ln t / N(a)) with t the number of
    // records in the window, ties to the lowest index.
    std::size_t select() const;

    // Records reward successes / batch_size. Throws std::invalid_argument if
    // successes > batch_size or the action is out of range.
    void update(std::size_t action, std::size_t successes, std::size_t batch_size);
    void record(std::size_t action, double reward);

    const std::vector<OperatorRatios>& actions() const { return actions_; }
    const std::deque<BanditRecord>& window() const { return window_; }
    std::size_t window_length() const { return window_length_; }
    std::size_t count(std::size_t a) const { return counts_[a]; }
    double reward_sum(std::size_t a) const { return sums_[a]; }
    double ucb(std::size_t a) const;

    // A state whose caches are recomputed from the given window contents.
    static BanditState from_window(std::vector<OperatorRatios> actions, std::size_t window_length,
                                   const std::deque<BanditRecord>& window);

private:
    void recompute_sums();

    std::vector<OperatorRatios> actions_;
    std::size_t window_length_;
    std::deque<BanditRecord> window_;
    std::vector<std::size_t> counts_;
    std::vector<double> sums_;
    std::size_t updates_since_refresh_ = 0;
};

}  // namespace dde
