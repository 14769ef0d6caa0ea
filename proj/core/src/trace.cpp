#include "spsc/trace.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spsc/textio.hpp"

namespace spsc {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'S', 'C', 'T', 'R', 'C', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "trace file writer assumes a little-endian host");

inline int block_bit(const Block& b, int byte_index, int bit_index) {
    return (b[static_cast<std::size_t>(byte_index)] >> bit_index) & 1;
}

void append_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void append_u64(std::string& out, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
}

}  // namespace

void SimOptions::validate() const {
    if (clk_level != 0 && clk_level != 1)
        throw std::invalid_argument("clk_level must be 0 or 1");
    if (!(noise_sigma >= 0.0))
        throw std::invalid_argument("noise_sigma must be nonnegative");
    if (!(background_offset >= 0.0))
        throw std::invalid_argument("background_offset must be nonnegative");
}

double simulate_one(const StateRegisterConfig& config, const LeakageTable& table,
                    const RoundTrace& rt, const SimOptions& options, Rng& rng) {
    const std::uint8_t clk = static_cast<std::uint8_t>(options.clk_level);
    double total = options.background_offset;

    for (int byte = 0; byte < 16; ++byte) {
        for (int b = 0; b < 8; ++b) {
            const BitCell& bc = config.bit(byte, b);
            const std::uint8_t d_new = static_cast<std::uint8_t>(block_bit(rt.ciphertext, byte, b));
            const std::uint8_t q_prev =
                static_cast<std::uint8_t>(block_bit(rt.pre_final_state, byte, b));

            if (bc.kind == BitCell::Kind::Plain) {
                total += ff_leakage(table, bc.cell, bc.strengths[0], {clk, d_new, q_prev});
            } else if (bc.paths == 1) {
                total += ff_leakage(table, CellType::LVT, bc.strengths[0], {clk, d_new, q_prev});
                total += table.mux_leakage;
            } else {
                const int ctl = rng.bit();  // 0 selects path 0, 1 selects path 1
                const DriveStrength active = bc.strengths[static_cast<std::size_t>(ctl)];
                const DriveStrength inactive = bc.strengths[static_cast<std::size_t>(1 - ctl)];
                total += ff_leakage(table, CellType::LVT, active, {clk, d_new, q_prev});
                total += ff_leakage(table, CellType::LVT, inactive, {clk, q_prev, q_prev});
                total += table.mux_leakage;
            }
        }
    }

    if (options.noise_sigma > 0.0) total += rng.normal(options.noise_sigma);
    return total;
}

TraceSet generate_traces(const StateRegisterConfig& config, const LeakageTable& table,
                         const Block& key, std::size_t n, const SimOptions& options) {
    if (n < 1) throw std::invalid_argument("generate_traces: n must be >= 1");
    options.validate();

    TraceSet ts;
    ts.key = key;
    ts.options = options;
    ts.config_label = config.label;
    ts.plaintexts.resize(n);
    ts.ciphertexts.resize(n);
    ts.pre_final_states.resize(n);
    ts.power.resize(n);

#pragma omp parallel for schedule(dynamic, 256)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        Rng rng(derive_seed(options.seed, kStreamTrace, static_cast<std::uint64_t>(i)));
        Block pt;
        for (auto& byte : pt.bytes) byte = rng.next_byte();
        const RoundTrace rt = encrypt(key, pt);
        const std::size_t idx = static_cast<std::size_t>(i);
        ts.plaintexts[idx] = pt;
        ts.ciphertexts[idx] = rt.ciphertext;
        ts.pre_final_states[idx] = rt.pre_final_state;
        ts.power[idx] = simulate_one(config, table, rt, options, rng);
    }
    return ts;
}

void save_traces(const TraceSet& traces, const std::filesystem::path& path) {
    std::string out;
    out.reserve(28 + traces.size() * 40);
    out.append(kMagic, 8);
    append_u32(out, kVersion);
    append_u64(out, traces.size());
    out.append(reinterpret_cast<const char*>(traces.key.data()), 16);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        out.append(reinterpret_cast<const char*>(traces.plaintexts[i].data()), 16);
        out.append(reinterpret_cast<const char*>(traces.ciphertexts[i].data()), 16);
        char buf[8];
        std::memcpy(buf, &traces.power[i], 8);
        out.append(buf, 8);
    }
    atomic_write(path, out);

    nlohmann::ordered_json meta;
    meta["format"] = "spsclab-traces";
    meta["version"] = kVersion;
    meta["n"] = traces.size();
    meta["key"] = to_hex(traces.key);
    meta["config_label"] = traces.config_label;
    meta["options"] = {{"clk_level", traces.options.clk_level},
                       {"noise_sigma", traces.options.noise_sigma},
                       {"background_offset", traces.options.background_offset},
                       {"seed", traces.options.seed}};
    atomic_write(path.string() + ".meta", meta.dump(2) + "\n");
}

TraceSet load_traces(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    if (data.size() < 36 || std::memcmp(data.data(), kMagic, 8) != 0)
        throw std::runtime_error("not a spsclab trace file: " + path.string());
    std::uint32_t version = 0;
    std::memcpy(&version, data.data() + 8, 4);
    if (version != kVersion)
        throw std::runtime_error("unsupported trace file version in " + path.string());
    std::uint64_t n = 0;
    std::memcpy(&n, data.data() + 12, 8);
    if (data.size() != 36 + n * 40)
        throw std::runtime_error("truncated trace file: " + path.string());

    TraceSet ts;
    std::memcpy(ts.key.data(), data.data() + 20, 16);
    ts.plaintexts.resize(n);
    ts.ciphertexts.resize(n);
    ts.pre_final_states.resize(n);
    ts.power.resize(n);

    const Block last_round_key = key_schedule(ts.key)[10];
    const char* p = data.data() + 36;
    for (std::uint64_t i = 0; i < n; ++i) {
        std::memcpy(ts.plaintexts[i].data(), p, 16);
        std::memcpy(ts.ciphertexts[i].data(), p + 16, 16);
        std::memcpy(&ts.power[i], p + 32, 8);
        ts.pre_final_states[i] = invert_final_round(ts.ciphertexts[i], last_round_key);
        p += 40;
    }

    const std::filesystem::path meta_path = path.string() + ".meta";
    if (std::filesystem::exists(meta_path)) {
        const auto meta = nlohmann::json::parse(read_file(meta_path));
        ts.config_label = meta.value("config_label", "");
        if (meta.contains("options")) {
            const auto& o = meta["options"];
            ts.options.clk_level = o.value("clk_level", 0);
            ts.options.noise_sigma = o.value("noise_sigma", 0.0);
            ts.options.background_offset = o.value("background_offset", 0.0);
            ts.options.seed = o.value("seed", std::uint64_t{0});
        }
    }
    return ts;
}

void export_csv(const TraceSet& traces, std::ostream& out) {
    out << "plaintext,ciphertext,power\n";
    for (std::size_t i = 0; i < traces.size(); ++i)
        out << to_hex(traces.plaintexts[i]) << "," << to_hex(traces.ciphertexts[i]) << ","
            << fmt_double(traces.power[i]) << "\n";
}

}  // namespace spsc
