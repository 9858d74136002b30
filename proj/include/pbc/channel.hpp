// Three-receiver broadcast channel: kernel p(y1,y3|x) plus the physical
// degradation kernel p(y2|y1). Receiver 2's observation is always sampled
// from receiver 1's output, so degradation holds by construction.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbc/prob.hpp"
#include "pbc/rng.hpp"

namespace pbc {

struct BroadcastChannel {
    int y1_size = 0, y2_size = 0, y3_size = 0;
    ConditionalPmf k13;  // 2 rows, y1_size*y3_size cols; pair index = y1*y3_size + y3
    ConditionalPmf k2;   // y1_size rows, y2_size cols

    BroadcastChannel(int y1s, int y3s, ConditionalPmf joint13, ConditionalPmf deg2)
        : y1_size(y1s), y2_size(deg2.output_size()), y3_size(y3s), k13(std::move(joint13)), k2(std::move(deg2)) {
        if (k13.input_size() != 2) throw ValidationError("BroadcastChannel: input must be binary");
        if (k13.output_size() != y1_size * y3_size)
            throw ValidationError("BroadcastChannel: k13 column count != y1_size*y3_size");
        if (k2.input_size() != y1_size) throw ValidationError("BroadcastChannel: k2 input != y1 alphabet");
    }

    ConditionalPmf y1_given_x() const {
        std::vector<double> rows(2u * static_cast<std::size_t>(y1_size), 0.0);
        for (int x = 0; x < 2; ++x)
            for (int y1 = 0; y1 < y1_size; ++y1)
                for (int y3 = 0; y3 < y3_size; ++y3)
                    rows[static_cast<std::size_t>(x) * y1_size + y1] += k13.at(x, y1 * y3_size + y3);
        return ConditionalPmf(2, y1_size, std::move(rows));
    }

    ConditionalPmf y3_given_x() const {
        std::vector<double> rows(2u * static_cast<std::size_t>(y3_size), 0.0);
        for (int x = 0; x < 2; ++x)
            for (int y1 = 0; y1 < y1_size; ++y1)
                for (int y3 = 0; y3 < y3_size; ++y3)
                    rows[static_cast<std::size_t>(x) * y3_size + y3] += k13.at(x, y1 * y3_size + y3);
        return ConditionalPmf(2, y3_size, std::move(rows));
    }

    // Composition (x -> y1) then (y1 -> y2).
    ConditionalPmf y2_given_x() const {
        auto m1 = y1_given_x();
        std::vector<double> rows(2u * static_cast<std::size_t>(y2_size), 0.0);
        for (int x = 0; x < 2; ++x)
            for (int y1 = 0; y1 < y1_size; ++y1)
                for (int y2 = 0; y2 < y2_size; ++y2)
                    rows[static_cast<std::size_t>(x) * y2_size + y2] += m1.at(x, y1) * k2.at(y1, y2);
        return ConditionalPmf(2, y2_size, std::move(rows));
    }

    ConditionalPmf receiver_kernel(int j) const {
        switch (j) {
            case 1: return y1_given_x();
            case 2: return y2_given_x();
            case 3: return y3_given_x();
            default: throw ValidationError("receiver_kernel: receiver id must be 1, 2 or 3");
        }
    }

    bool operator==(const BroadcastChannel&) const = default;
};

// Y1 and Y3 independent given X.
inline BroadcastChannel make_product_channel(const ConditionalPmf& c1, const ConditionalPmf& c3,
                                             const ConditionalPmf& c2) {
    if (c1.input_size() != 2 || c3.input_size() != 2)
        throw ValidationError("make_product_channel: component kernels must have binary input");
    int y1s = c1.output_size(), y3s = c3.output_size();
    std::vector<double> rows(2u * static_cast<std::size_t>(y1s) * y3s, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int y1 = 0; y1 < y1s; ++y1)
            for (int y3 = 0; y3 < y3s; ++y3)
                rows[static_cast<std::size_t>(x) * y1s * y3s + y1 * y3s + y3] = c1.at(x, y1) * c3.at(x, y3);
    return BroadcastChannel(y1s, y3s, ConditionalPmf(2, y1s * y3s, std::move(rows)), c2);
}

// General coupling between y1 and y3; k2 as above.
inline BroadcastChannel make_coupled_channel(int y1_size, int y3_size, ConditionalPmf k13,
                                             ConditionalPmf k2) {
    return BroadcastChannel(y1_size, y3_size, std::move(k13), std::move(k2));
}

struct ChannelSample {
    std::vector<int> y1, y2, y3;
};

// Memoryless use: per position, (y1,y3) from k13(x_i), then y2 from k2(y1).
// Consumes exactly two stream draws per position, in that order.
inline ChannelSample transmit(const BroadcastChannel& ch, std::span<const std::uint8_t> x, RngStream& rng) {
    ChannelSample s;
    s.y1.resize(x.size());
    s.y2.resize(x.size());
    s.y3.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        int pair = rng.next_index(ch.k13.row(x[i]));
        s.y1[i] = pair / ch.y3_size;
        s.y3[i] = pair % ch.y3_size;
        s.y2[i] = rng.next_index(ch.k2.row(s.y1[i]));
    }
    return s;
}

// Exact single-letter joint over (W,V,X,Yj), enumerated.
struct JointWVXY {
    int y_size = 0;
    std::vector<double> p;  // [w][v][x][y]

    double& at(int w, int v, int x, int y) {
        return p[((static_cast<std::size_t>(w) * 2 + v) * 2 + x) * y_size + y];
    }
    double at(int w, int v, int x, int y) const {
        return p[((static_cast<std::size_t>(w) * 2 + v) * 2 + x) * y_size + y];
    }
};

inline JointWVXY induced_output_joint(const LayeredDistribution& d, const BroadcastChannel& ch, int j) {
    auto ky = ch.receiver_kernel(j);
    JointWVXY out;
    out.y_size = ky.output_size();
    out.p.assign(8u * static_cast<std::size_t>(out.y_size), 0.0);
    for (int w = 0; w < 2; ++w)
        for (int v = 0; v < 2; ++v)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < out.y_size; ++y) out.at(w, v, x, y) = d.joint(w, v, x) * ky.at(x, y);
    return out;
}

struct InducedJoints {
    JointWVXY j1, j2, j3;
};

inline InducedJoints induced_output_joints(const LayeredDistribution& d, const BroadcastChannel& ch) {
    return {induced_output_joint(d, ch, 1), induced_output_joint(d, ch, 2), induced_output_joint(d, ch, 3)};
}

// Marginal helpers used by the rate-region module.
inline Joint2 joint_of(const JointWVXY& j, int var) {  // var: 0=w,1=v,2=x against y
    Joint2 out(2, j.y_size);
    for (int w = 0; w < 2; ++w)
        for (int v = 0; v < 2; ++v)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < j.y_size; ++y) {
                    int s = var == 0 ? w : (var == 1 ? v : x);
                    out.at(s, y) += j.at(w, v, x, y);
                }
    return out;
}

inline Joint3 joint_of_given(const JointWVXY& j, int var, int cond) {  // (var ; y | cond)
    Joint3 out(2, j.y_size, 2);
    for (int w = 0; w < 2; ++w)
        for (int v = 0; v < 2; ++v)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < j.y_size; ++y) {
                    int s = var == 0 ? w : (var == 1 ? v : x);
                    int z = cond == 0 ? w : (cond == 1 ? v : x);
                    out.at(s, y, z) += j.at(w, v, x, y);
                }
    return out;
}

}  // namespace pbc
