#include "dde/bandit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dde {

std::vector<OperatorRatios> default_bandit_actions() {
    return {
        {0.00, 0.00, 1.00}, {0.25, 0.00, 0.75}, {0.50, 0.00, 0.50}, {0.75, 0.00, 0.25}, {1.00, 0.00, 0.00},
        {0.00, 0.25, 0.75}, {0.00, 0.50, 0.50}, {0.00, 0.75, 0.25}, {0.00, 1.00, 0.00},
    };
}

BanditState::BanditState(std::vector<OperatorRatios> actions, std::size_t window_length)
    : actions_(std::move(actions)),
      window_length_(window_length),
      counts_(actions_.size(), 0),
      sums_(actions_.size(), 0.0) {
    if (actions_.empty()) throw std::invalid_argument("bandit needs at least one action");
    if (window_length_ == 0) throw std::invalid_argument("bandit window must be positive");
    for (const auto& a : actions_) a.validate();
}

double BanditState::ucb(std::size_t a) const {
    if (counts_[a] == 0) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(counts_[a]);
    const double t = static_cast<double>(window_.size());
    return sums_[a] / n + std::sqrt(2.0 * std::log(t) / n);
}

std::size_t BanditState::select() const {
    for (std::size_t a = 0; a < actions_.size(); ++a)
        if (counts_[a] == 0) return a;
    std::size_t best = 0;
    double best_value = ucb(0);
    for (std::size_t a = 1; a < actions_.size(); ++a) {
        const double v = ucb(a);
        if (v > best_value) {
            best_value = v;
            best = a;
        }
    }
    return best;
}

void BanditState::update(std::size_t action, std::size_t successes, std::size_t batch_size) {
    if (batch_size == 0 || successes > batch_size)
        throw std::invalid_argument("bandit update: successes must not exceed a positive batch size");
    record(action, static_cast<double>(successes) / static_cast<double>(batch_size));
}

void BanditState::record(std::size_t action, double reward) {
    if (action >= actions_.size()) throw std::invalid_argument("bandit update: action out of range");
    if (!(reward >= 0.0 && reward <= 1.0)) throw std::invalid_argument("bandit reward must lie in [0, 1]");
    window_.push_back({action, reward});
    ++counts_[action];
    sums_[action] += reward;
    if (window_.size() > window_length_) {
        const auto old = window_.front();
        window_.pop_front();
        --counts_[old.action];
        sums_[old.action] -= old.reward;
    }
    // Resync the running sums once per window.
    if (++updates_since_refresh_ >= window_length_) recompute_sums();
}

void BanditState::recompute_sums() {
    std::fill(sums_.begin(), sums_.end(), 0.0);
    for (const auto& r : window_) sums_[r.action] += r.reward;
    updates_since_refresh_ = 0;
}

BanditState BanditState::from_window(std::vector<OperatorRatios> actions, std::size_t window_length,
                                     const std::deque<BanditRecord>& window) {
    BanditState s(std::move(actions), window_length);
    s.window_ = window;
    for (const auto& r : window) ++s.counts_[r.action];
    s.recompute_sums();
    return s;
}

}  // namespace dde
