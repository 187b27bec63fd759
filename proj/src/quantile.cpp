#include "tdepth/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdepth/error.hpp"

namespace tdepth {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ParameterError("alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

void check_step(double step, double alpha) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw ParameterError("step must be positive, got " + std::to_string(step));
    }
    if (step * std::max(alpha, 1.0 - alpha) >= 1.0) {
        throw ParameterError("step too large for multiplicative update: " + std::to_string(step));
    }
}

void check_alphas(const std::vector<double>& alphas) {
    if (alphas.empty()) throw ParameterError("alpha list is empty");
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        check_alpha(alphas[k]);
        if (k > 0 && !(alphas[k] > alphas[k - 1])) {
            throw ParameterError("alphas must be strictly increasing");
        }
    }
}

// Shifted-coordinate step shared by the single and joint updates.
inline double multiplicative_step(double shifted_estimate, double shifted_sample, double alpha,
                                  double step) {
    if (shifted_sample > shifted_estimate) return (1.0 + step * alpha) * shifted_estimate;
    if (shifted_sample < shifted_estimate) return (1.0 - step * (1.0 - alpha)) * shifted_estimate;
    return shifted_estimate;
}

}  // namespace

void QuantileState::validate() const {
    check_alpha(alpha);
    if (!std::isfinite(estimate) || !std::isfinite(offset)) {
        throw InputError("quantile estimate and offset must be finite");
    }
    if (!(estimate + offset > 0.0)) {
        throw ParameterError("estimate + offset must be positive");
    }
}

QuantileState dumique_update(QuantileState state, double sample, double step) {
    if (!std::isfinite(sample)) throw InputError("non-finite sample");
    state.validate();
    check_step(step, state.alpha);
    const double q = multiplicative_step(state.estimate + state.offset, sample + state.offset,
                                         state.alpha, step);
    state.estimate = q - state.offset;
    return state;
}

void restore_order(std::span<double> values, double gap) {
    const std::size_t n = values.size();
    bool sorted = true;
    for (std::size_t k = 1; k < n && sorted; ++k) sorted = values[k] >= values[k - 1];
    if (sorted) return;

    // Pool-adjacent-violators on z_k = v_k - k*gap.
    struct Block {
        double sum;
        std::size_t count;
        double mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Block> blocks;
    blocks.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        blocks.push_back({values[k] - static_cast<double>(k) * gap, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            Block top = blocks.back();
            blocks.pop_back();
            blocks.back().sum += top.sum;
            blocks.back().count += top.count;
        }
    }
    std::size_t k = 0;
    for (const Block& b : blocks) {
        const double m = b.mean();
        for (std::size_t j = 0; j < b.count; ++j, ++k) values[k] = m + static_cast<double>(k) * gap;
    }
}

JointQuantileState::JointQuantileState(std::vector<double> alphas, double initial, double offset)
    : JointQuantileState(alphas, std::vector<double>(alphas.size(), initial), offset) {}

JointQuantileState::JointQuantileState(std::vector<double> alphas, std::vector<double> estimates,
                                       double offset)
    : offset_(offset) {
    check_alphas(alphas);
    if (estimates.size() != alphas.size()) {
        throw InputError("one estimate per alpha required");
    }
    states_.reserve(alphas.size());
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        if (k > 0 && estimates[k] < estimates[k - 1]) {
            throw InputError("joint estimates must be non-decreasing in alpha");
        }
        QuantileState s{estimates[k], alphas[k], offset};
        if (!std::isfinite(s.estimate) || !std::isfinite(offset)) {
            throw InputError("quantile estimate and offset must be finite");
        }
        states_.push_back(s);
    }
}

void JointQuantileState::set_order_gap(double gap) {
    if (!(gap >= 0.0)) throw ParameterError("order gap must be non-negative");
    gap_ = gap;
}

std::vector<double> JointQuantileState::alphas() const {
    std::vector<double> out;
    out.reserve(states_.size());
    for (const auto& s : states_) out.push_back(s.alpha);
    return out;
}

std::vector<double> JointQuantileState::estimates() const {
    std::vector<double> out;
    out.reserve(states_.size());
    for (const auto& s : states_) out.push_back(s.estimate);
    return out;
}

void JointQuantileState::update(double sample, double step) {
    if (!std::isfinite(sample)) throw InputError("non-finite sample");
    for (const auto& s : states_) check_step(step, s.alpha);

    std::vector<double> shifted(states_.size());
    const double shifted_sample = sample + offset_;
    for (std::size_t k = 0; k < states_.size(); ++k) {
        shifted[k] = multiplicative_step(states_[k].estimate + offset_, shifted_sample,
                                         states_[k].alpha, step);
    }
    restore_order(shifted, gap_);
    for (std::size_t k = 0; k < states_.size(); ++k) states_[k].estimate = shifted[k] - offset_;
}

JointQuantileState joint_update(JointQuantileState state, double sample, double step) {
    state.update(sample, step);
    return state;
}

double type8_sorted(std::span<const double> sorted, double alpha) {
    const std::size_t n = sorted.size();
    if (n == 0) throw InputError("empty sample");
    const double m = (alpha + 1.0) / 3.0;
    double h = static_cast<double>(n) * alpha + m;  // 1-based fractional rank
    const double nearest = std::round(h);
    if (std::abs(h - nearest) <= 1e-12 * std::max(1.0, h)) h = nearest;
    const double jf = std::floor(h);
    if (jf < 1.0) return sorted.front();
    if (jf >= static_cast<double>(n)) return sorted.back();
    const auto j = static_cast<std::size_t>(jf);
    const double delta = h - jf;
    return (1.0 - delta) * sorted[j - 1] + delta * sorted[j];
}

double offline_quantile_type8(std::span<const double> samples, double alpha) {
    check_alpha(alpha);
    if (samples.empty()) throw InputError("empty sample");
    std::vector<double> y(samples.begin(), samples.end());
    for (double v : y) {
        if (!std::isfinite(v)) throw InputError("non-finite sample");
    }
    std::sort(y.begin(), y.end());
    return type8_sorted(y, alpha);
}

StepSchedule StepSchedule::constant(double lambda) {
    StepSchedule s;
    s.mode = ScheduleMode::constant;
    s.lambda = lambda;
    s.validate();
    return s;
}

StepSchedule StepSchedule::decay() {
    StepSchedule s;
    s.mode = ScheduleMode::decay;
    return s;
}

StepSchedule StepSchedule::floored_decay(double lambda_min) {
    StepSchedule s;
    s.mode = ScheduleMode::floored_decay;
    s.lambda_min = lambda_min;
    s.validate();
    return s;
}

double StepSchedule::peek() const {
    const double inv = 1.0 / static_cast<double>(n);
    switch (mode) {
        case ScheduleMode::constant: return lambda;
        case ScheduleMode::decay: return inv;
        case ScheduleMode::floored_decay: return std::max(inv, lambda_min);
    }
    return inv;
}

double StepSchedule::next() {
    const double step = peek();
    ++n;
    return step;
}

void StepSchedule::validate() const {
    if (mode == ScheduleMode::constant && !(lambda > 0.0 && lambda < 1.0)) {
        throw ParameterError("constant step must lie in (0,1)");
    }
    if (!(lambda_min >= 0.0 && lambda_min < 1.0)) {
        throw ParameterError("lambda_min must lie in [0,1)");
    }
    if (n == 0) throw ParameterError("schedule counter starts at 1");
}

ScheduledStep step_schedule_next(StepSchedule schedule) {
    const double step = schedule.next();
    return {step, schedule};
}

}  // namespace tdepth
