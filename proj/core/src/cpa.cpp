#include "spsc/cpa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace spsc {

namespace {

constexpr std::array<std::uint8_t, 256> make_popcount8() {
    std::array<std::uint8_t, 256> t{};
    for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::popcount(static_cast<unsigned>(i)));
    return t;
}
constexpr auto kPop8 = make_popcount8();

void check_lengths(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 samples");
}

}  // namespace

std::string_view model_name(PowerModel m) { return m == PowerModel::HW ? "hw" : "hd"; }

PowerModel model_from_name(std::string_view name) {
    if (name == "hw" || name == "HW") return PowerModel::HW;
    if (name == "hd" || name == "HD") return PowerModel::HD;
    throw std::invalid_argument("unknown power model '" + std::string(name) + "'");
}

PearsonResult pearson_checked(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return {0.0, true};
    return {sxy / std::sqrt(sxx * syy), false};
}

double pearson(std::span<const double> x, std::span<const double> y) {
    return pearson_checked(x, y).r;
}

double pearson_streaming(std::span<const double> x, std::span<const double> y) {
    check_lengths(x, y);
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    const double nn = static_cast<double>(n);
    const double vx = nn * sxx - sx * sx;
    const double vy = nn * syy - sy * sy;
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return (nn * sxy - sx * sy) / std::sqrt(vx * vy);
}

int hypothesis(PowerModel model, const Block& ciphertext, int byte_index, int key_guess) {
    if (byte_index < 0 || byte_index > 15)
        throw std::out_of_range("hypothesis: byte index out of range");
    if (key_guess < 0 || key_guess > 255)
        throw std::out_of_range("hypothesis: key guess out of range");
    const int m = shift_rows_origin(byte_index);
    const std::uint8_t v = inv_sbox(
        static_cast<std::uint8_t>(ciphertext[static_cast<std::size_t>(byte_index)] ^ key_guess));
    if (model == PowerModel::HW) return hw(v);
    return hd(ciphertext[static_cast<std::size_t>(m)], v);
}

AttackResult attack(const TraceSet& traces, PowerModel model) {
    return attack_subset(traces, model, {});
}

AttackResult attack_subset(const TraceSet& traces, PowerModel model,
                           std::span<const std::uint32_t> indices) {
    const std::size_t n = indices.empty() ? traces.size() : indices.size();
    if (n < 2) throw std::invalid_argument("attack: need at least 2 traces");

    AttackResult result;
    result.true_last_round_key = key_schedule(traces.key)[10];

    // Center the power vector once; Pearson is shift-invariant and the
    // centered raw-moment form avoids cancellation in the per-guess sums.
    std::vector<double> cp(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean += traces.power[indices.empty() ? i : indices[i]];
    mean /= static_cast<double>(n);
    double spp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = traces.power[indices.empty() ? i : indices[i]] - mean;
        cp[i] = v;
        spp += v * v;
    }

    if (spp == 0.0) {
        result.degenerate = true;
        result.recovered_key = Block{};
        for (auto& row : result.scores.pcc) row.fill(0.0);
        result.scores.best_guess.fill(0);
        result.scores.margin.fill(0.0);
        result.success = false;
        return result;
    }

    const bool use_hd = model == PowerModel::HD;
    const double nn = static_cast<double>(n);

#pragma omp parallel for schedule(static)
    for (int j = 0; j < 16; ++j) {
        const int m = shift_rows_origin(j);
        std::vector<std::uint8_t> cj(n), cm(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t t = indices.empty() ? i : indices[i];
            cj[i] = traces.ciphertexts[t][static_cast<std::size_t>(j)];
            cm[i] = use_hd ? traces.ciphertexts[t][static_cast<std::size_t>(m)] : 0;
        }

        auto& row = result.scores.pcc[static_cast<std::size_t>(j)];
        if (!use_hd) {
            // The HW hypothesis depends on the trace only through cj, so the
            // per-guess sums collapse onto a 256-bin histogram.
            std::array<std::uint32_t, 256> cnt{};
            std::array<double, 256> psum{};
            for (std::size_t i = 0; i < n; ++i) {
                ++cnt[cj[i]];
                psum[cj[i]] += cp[i];
            }
            for (int k = 0; k < 256; ++k) {
                std::uint32_t sh = 0, shh = 0;
                double shp = 0.0;
                for (int x = 0; x < 256; ++x) {
                    const std::uint32_t h = kPop8[inv_sbox(static_cast<std::uint8_t>(x ^ k))];
                    sh += h * cnt[static_cast<std::size_t>(x)];
                    shh += h * h * cnt[static_cast<std::size_t>(x)];
                    shp += static_cast<double>(h) * psum[static_cast<std::size_t>(x)];
                }
                const double var_h = static_cast<double>(shh) -
                                     static_cast<double>(sh) * static_cast<double>(sh) / nn;
                row[static_cast<std::size_t>(k)] = var_h > 0.0 ? shp / std::sqrt(var_h * spp) : 0.0;
            }
        } else {
            for (int k = 0; k < 256; ++k) {
                std::uint32_t sh = 0, shh = 0;
                double shp = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const std::uint8_t v = static_cast<std::uint8_t>(
                        inv_sbox(static_cast<std::uint8_t>(cj[i] ^ k)) ^ cm[i]);
                    const std::uint32_t h = kPop8[v];
                    sh += h;
                    shh += h * h;
                    shp += static_cast<double>(h) * cp[i];
                }
                // Hypothesis sums are exact integers; power is centered, so
                // the covariance term is just shp.
                const double var_h = static_cast<double>(shh) -
                                     static_cast<double>(sh) * static_cast<double>(sh) / nn;
                row[static_cast<std::size_t>(k)] = var_h > 0.0 ? shp / std::sqrt(var_h * spp) : 0.0;
            }
        }

        int best = 0;
        double best_abs = -1.0, second_abs = -1.0;
        for (int k = 0; k < 256; ++k) {
            const double a = std::abs(row[static_cast<std::size_t>(k)]);
            if (a > best_abs) {
                second_abs = best_abs;
                best_abs = a;
                best = k;
            } else if (a > second_abs) {
                second_abs = a;
            }
        }
        result.scores.best_guess[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(best);
        result.scores.margin[static_cast<std::size_t>(j)] = best_abs - std::max(second_abs, 0.0);
    }

    result.recovered_key.bytes = result.scores.best_guess;
    result.success = result.recovered_key == result.true_last_round_key;
    return result;
}

std::string attack_report_json(const AttackResult& result, PowerModel model,
                               std::size_t trace_count) {
    nlohmann::ordered_json rep;
    rep["model"] = std::string(model_name(model));
    rep["traces"] = trace_count;
    rep["degenerate"] = result.degenerate;
    rep["success"] = result.success;
    rep["recovered_last_round_key"] = to_hex(result.recovered_key);

    nlohmann::ordered_json bytes = nlohmann::ordered_json::array();
    for (int j = 0; j < 16; ++j) {
        const auto& row = result.scores.pcc[static_cast<std::size_t>(j)];
        std::array<int, 256> order;
        for (int k = 0; k < 256; ++k) order[static_cast<std::size_t>(k)] = k;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(row[static_cast<std::size_t>(a)]) > std::abs(row[static_cast<std::size_t>(b)]);
        });
        nlohmann::ordered_json top = nlohmann::ordered_json::array();
        for (int r = 0; r < 5; ++r) {
            char hex[3];
            std::snprintf(hex, sizeof(hex), "%02x", order[static_cast<std::size_t>(r)]);
            top.push_back({{"key", hex}, {"abs_pcc", std::abs(row[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])])}});
        }
        char best_hex[3];
        std::snprintf(best_hex, sizeof(best_hex), "%02x",
                      result.scores.best_guess[static_cast<std::size_t>(j)]);
        bytes.push_back({{"byte", j},
                         {"best_guess", best_hex},
                         {"margin", result.scores.margin[static_cast<std::size_t>(j)]},
                         {"top5", top}});
    }
    rep["bytes"] = bytes;
    return rep.dump(2) + "\n";
}

}  // namespace spsc
