#include "mltspec/serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mltspec {

namespace {

using nlohmann::json;

// Complex arrays travel as base-16 text: each double is 16 hex characters,
// little-endian byte order, re then im per entry.
std::string hex_encode(const VectorXcd& v) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(static_cast<size_t>(v.size()) * 32);
    auto push_double = [&](double d) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        for (int b = 0; b < 8; ++b) {
            unsigned byte = (bits >> (8 * b)) & 0xffu;
            out.push_back(digits[byte >> 4]);
            out.push_back(digits[byte & 0xf]);
        }
    };
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        push_double(v(i).real());
        push_double(v(i).imag());
    }
    return out;
}

VectorXcd hex_decode(const std::string& s) {
    if (s.size() % 32 != 0) throw std::invalid_argument("hex_decode: truncated complex array");
    auto nibble = [](char c) -> unsigned {
        if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
        throw std::invalid_argument("hex_decode: bad hex digit");
    };
    auto pull_double = [&](size_t pos) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
            unsigned byte = (nibble(s[pos + 2 * static_cast<size_t>(b)]) << 4) |
                            nibble(s[pos + 2 * static_cast<size_t>(b) + 1]);
            bits |= static_cast<std::uint64_t>(byte) << (8 * b);
        }
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    };
    VectorXcd v(static_cast<Eigen::Index>(s.size() / 32));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = cxd(pull_double(static_cast<size_t>(i) * 32), pull_double(static_cast<size_t>(i) * 32 + 16));
    return v;
}

json sensing_json(const SensingMatrix& s) {
    json j;
    j["dims"] = s.source_dims().dims();
    if (s.is_identity())
        j["selection"] = "all";
    else
        j["selection"] = s.row_selection();
    return j;
}

SensingMatrix sensing_parse(const json& j) {
    DimensionVector dims(j.at("dims").get<std::vector<int>>());
    const auto& sel = j.at("selection");
    if (sel.is_string()) {
        if (sel.get<std::string>() != "all")
            throw std::invalid_argument("sensing: selection must be \"all\" or an index list");
        return SensingMatrix::identity(dims);
    }
    return SensingMatrix(sel.get<std::vector<int>>(), dims);
}

}  // namespace

std::string sensing_to_json(const SensingMatrix& s) { return sensing_json(s).dump(2); }

SensingMatrix sensing_from_json(const std::string& text) { return sensing_parse(json::parse(text)); }

std::string channel_to_json(const SparseChannel& ch) {
    json j;
    j["tx_dims"] = ch.tx_dims.dims();
    j["rx_dims"] = ch.rx_dims.dims();
    std::vector<std::vector<double>> freqs;
    for (int p = 0; p < ch.freqs.order(); ++p) {
        std::vector<double> row(static_cast<size_t>(ch.freqs.count()));
        for (int k = 0; k < ch.freqs.count(); ++k) row[static_cast<size_t>(k)] = ch.freqs.matrix()(p, k);
        freqs.push_back(std::move(row));
    }
    j["freqs"] = freqs;
    std::vector<std::vector<double>> gains;
    for (int k = 0; k < ch.paths(); ++k) gains.push_back({ch.gains(k).real(), ch.gains(k).imag()});
    j["gains"] = gains;
    return j.dump(2);
}

SparseChannel channel_from_json(const std::string& text) {
    json j = json::parse(text);
    SparseChannel ch;
    ch.tx_dims = DimensionVector(j.at("tx_dims").get<std::vector<int>>());
    ch.rx_dims = DimensionVector(j.at("rx_dims").get<std::vector<int>>());
    auto freqs = j.at("freqs").get<std::vector<std::vector<double>>>();
    const int d = static_cast<int>(freqs.size());
    const int k = d ? static_cast<int>(freqs[0].size()) : 0;
    MatrixXd f(d, k);
    for (int p = 0; p < d; ++p)
        for (int q = 0; q < k; ++q) f(p, q) = freqs[static_cast<size_t>(p)][static_cast<size_t>(q)];
    ch.freqs = FrequencySet(f);
    auto gains = j.at("gains").get<std::vector<std::vector<double>>>();
    ch.gains.resize(static_cast<Eigen::Index>(gains.size()));
    for (size_t i = 0; i < gains.size(); ++i) ch.gains(static_cast<Eigen::Index>(i)) = cxd(gains[i][0], gains[i][1]);
    ch.dim_perm = canonical_dim_permutation(ch.tx_dims, ch.rx_dims).first;
    return ch;
}

std::string generator_to_json(const MLTGenerator& gen) {
    json j;
    j["dims"] = gen.dims().dims();
    json coeffs = json::array();
    for (int id = 0; id < gen.table().n_lags(); ++id) {
        std::vector<int> lag = gen.table().lag_tuple(id);
        if (lag < std::vector<int>(lag.size(), 0)) continue;  // keep nonnegative lags only
        json rec;
        rec["lag"] = lag;
        rec["re"] = gen.coeffs()(id).real();
        rec["im"] = gen.coeffs()(id).imag();
        coeffs.push_back(rec);
    }
    j["coeffs"] = coeffs;
    return j.dump(2);
}

MLTGenerator generator_from_json(const std::string& text) {
    json j = json::parse(text);
    DimensionVector dims(j.at("dims").get<std::vector<int>>());
    MLTGenerator gen(dims);
    for (const auto& rec : j.at("coeffs")) {
        std::vector<int> lag = rec.at("lag").get<std::vector<int>>();
        cxd v(rec.at("re").get<double>(), rec.at("im").get<double>());
        int id = gen.table().lag_id(lag);
        gen.coeffs()(id) = v;
        gen.coeffs()(gen.table().negate(id)) = std::conj(v);
    }
    gen.symmetrize();
    return gen;
}

std::string measurement_to_json(const MeasurementOperator& op, const Observation& obs) {
    json j;
    j["pilot"]["alphabet"] = to_string(op.pilot().alphabet);
    j["pilot"]["m"] = op.pilot().m();
    j["pilot"]["p"] = op.pilot().p();
    VectorXcd pe = Eigen::Map<const VectorXcd>(op.pilot().entries.data(), op.pilot().entries.size());
    j["pilot"]["entries_hex"] = hex_encode(pe);
    j["sensing"] = sensing_json(op.sensing());
    j["n_rx"] = op.n_rx();
    j["observation"]["y_hex"] = hex_encode(obs.y);
    j["observation"]["noise_variance"] = obs.noise_variance;
    if (obs.snr_db) j["observation"]["snr_db"] = *obs.snr_db;
    return j.dump(2);
}

MeasurementRecord measurement_from_json(const std::string& text) {
    json j = json::parse(text);
    const int m = j.at("pilot").at("m").get<int>();
    const int p = j.at("pilot").at("p").get<int>();
    VectorXcd pe = hex_decode(j.at("pilot").at("entries_hex").get<std::string>());
    if (pe.size() != static_cast<Eigen::Index>(m) * p)
        throw std::invalid_argument("measurement: pilot entry count mismatch");
    PilotMatrix pilot;
    pilot.alphabet = pilot_alphabet_from_string(j.at("pilot").at("alphabet").get<std::string>());
    pilot.entries = Eigen::Map<const MatrixXcd>(pe.data(), m, p);
    SensingMatrix sensing = sensing_parse(j.at("sensing"));
    const int n_rx = j.at("n_rx").get<int>();

    MeasurementRecord rec{build_operator(pilot, sensing, n_rx), Observation{}};
    rec.obs.y = hex_decode(j.at("observation").at("y_hex").get<std::string>());
    rec.obs.noise_variance = j.at("observation").at("noise_variance").get<double>();
    if (j.at("observation").contains("snr_db")) rec.obs.snr_db = j["observation"]["snr_db"].get<double>();
    if (rec.obs.y.size() != rec.op.l()) throw std::invalid_argument("measurement: observation length mismatch");
    return rec;
}

std::string complex_vector_to_hex(const VectorXcd& v) { return hex_encode(v); }

VectorXcd complex_vector_from_hex(const std::string& hex) { return hex_decode(hex); }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace mltspec
