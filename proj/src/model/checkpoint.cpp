#include "ignn/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <map>
#include <sstream>

namespace ignn {
namespace {

constexpr std::array<char, 4> kMagic{'I', 'G', 'N', 'N'};

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void bytes(std::string_view s) { buf_.append(s); }
    const std::string& str() const { return buf_; }

private:
    void put(std::uint64_t v, int n) {
        for (int k = 0; k < n; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
    }
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string bytes(std::size_t n) {
        std::string s(n, '\0');
        if (n && !in_.read(s.data(), static_cast<std::streamsize>(n))) throw CheckpointError("checkpoint: truncated stream");
        return s;
    }

private:
    std::uint64_t get(int n) {
        unsigned char b[8];
        if (!in_.read(reinterpret_cast<char*>(b), n)) throw CheckpointError("checkpoint: truncated stream");
        std::uint64_t v = 0;
        for (int k = 0; k < n; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
        return v;
    }
    std::istream& in_;
};

void put_activation(Writer& w, const Activation& a) {
    w.u8(static_cast<std::uint8_t>(a.kind));
    w.f64(a.slope);
}

Activation get_activation(Reader& r) {
    const auto tag = r.u8();
    const double slope = r.f64();
    if (tag > static_cast<std::uint8_t>(Activation::Kind::identity)) throw CheckpointError("checkpoint: bad activation tag");
    Activation a{static_cast<Activation::Kind>(tag), slope};
    return a.kind == Activation::Kind::leaky_relu ? Activation::leaky_relu(slope) : a;
}

std::string hyper_block(const IgnnModel& m) {
    Writer w;
    w.u32(static_cast<std::uint32_t>(m.layers.size()));
    w.u32(static_cast<std::uint32_t>(m.relation_count()));
    for (const auto& layer : m.layers) {
        w.u64(layer.state_dim());
        w.u64(layer.input_dim());
        w.u8(static_cast<std::uint8_t>(layer.b_form));
        const auto& act = layer.activation;
        w.u32(static_cast<std::uint32_t>(act.segments().size()));
        if (act.uniform()) {
            put_activation(w, act.uniform_activation());
        } else {
            for (const auto& seg : act.segments()) {
                w.u64(seg.rows);
                put_activation(w, seg.phi);
            }
        }
        for (double k : layer.kappa) w.f64(k);
    }
    for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
        const InterLayerMap* map = m.inter_before(l + 1);
        w.u8(map ? 1 : 0);
        if (map) put_activation(w, map->act);
    }
    w.u8(static_cast<std::uint8_t>(m.readout));
    w.u8(static_cast<std::uint8_t>(m.head.kind));
    put_activation(w, m.head.act);
    w.u8(m.learnable_u ? 1 : 0);
    w.f64(m.dropout_rate);
    w.f64(m.forward_solve.tol);
    w.u64(m.forward_solve.max_iter);
    w.f64(m.backward_solve.tol);
    w.u64(m.backward_solve.max_iter);
    return w.str();
}

}  // namespace

std::size_t checkpoint_header_size(const IgnnModel& model) {
    return kMagic.size() + 4 + 8 + hyper_block(model).size() + 4;
}

void save_checkpoint(const IgnnModel& model, std::ostream& out) {
    model.validate();
    Writer w;
    w.bytes(std::string_view(kMagic.data(), kMagic.size()));
    w.u32(kCheckpointVersion);
    const std::string hyper = hyper_block(model);
    w.u64(hyper.size());
    w.bytes(hyper);
    const auto tensors = named_tensors(model);
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        w.u32(static_cast<std::uint32_t>(name.size()));
        w.bytes(name);
        w.u64(t->rows());
        w.u64(t->cols());
        for (double v : t->values()) w.f64(v);
    }
    out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
    if (!out) throw CheckpointError("checkpoint: write failed");
}

void save_checkpoint(const IgnnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
    save_checkpoint(model, out);
}

IgnnModel load_checkpoint(std::istream& in) {
    Reader r(in);
    const std::string magic = r.bytes(4);
    if (magic != std::string_view(kMagic.data(), kMagic.size())) throw CheckpointError("checkpoint: bad magic");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
    }
    const std::uint64_t hyper_len = r.u64();
    if (hyper_len > (1u << 24)) throw CheckpointError("checkpoint: implausible header length");
    std::istringstream hyper_stream(r.bytes(hyper_len));
    Reader h(hyper_stream);

    IgnnModel m;
    const std::uint32_t L = h.u32();
    const std::uint32_t N = h.u32();
    if (L == 0 || N == 0) throw CheckpointError("checkpoint: empty model");
    std::vector<std::pair<std::uint64_t, std::uint64_t>> dims;
    for (std::uint32_t l = 0; l < L; ++l) {
        IgnnLayer layer;
        const auto state = h.u64();
        const auto input = h.u64();
        dims.emplace_back(state, input);
        const auto form = h.u8();
        if (form > static_cast<std::uint8_t>(BForm::both)) throw CheckpointError("checkpoint: bad b-form tag");
        layer.b_form = static_cast<BForm>(form);
        const std::uint32_t segs = h.u32();
        if (segs == 0) {
            layer.activation = get_activation(h);
        } else {
            std::vector<ActivationMap::Segment> segments;
            for (std::uint32_t s = 0; s < segs; ++s) {
                const auto rows = h.u64();
                segments.push_back({rows, get_activation(h)});
            }
            layer.activation = ActivationMap(std::move(segments));
        }
        for (std::uint32_t i = 0; i < N; ++i) layer.kappa.push_back(h.f64());
        layer.relations.resize(N);
        m.layers.push_back(std::move(layer));
    }
    for (std::uint32_t l = 0; l + 1 < L; ++l) {
        if (h.u8()) {
            if (m.inter.empty()) m.inter.resize(L - 1);
            m.inter[l] = InterLayerMap{DenseMatrix(), DenseMatrix(), get_activation(h)};
        }
    }
    const auto readout = h.u8();
    if (readout > static_cast<std::uint8_t>(Readout::graph_mean)) throw CheckpointError("checkpoint: bad readout tag");
    m.readout = static_cast<Readout>(readout);
    const auto head = h.u8();
    if (head > static_cast<std::uint8_t>(HeadKind::mlp)) throw CheckpointError("checkpoint: bad head tag");
    m.head.kind = static_cast<HeadKind>(head);
    m.head.act = get_activation(h);
    const bool has_u = h.u8() != 0;
    m.dropout_rate = h.f64();
    m.forward_solve.tol = h.f64();
    m.forward_solve.max_iter = h.u64();
    m.backward_solve.tol = h.f64();
    m.backward_solve.max_iter = h.u64();
    if (hyper_stream.peek() != std::char_traits<char>::eof()) throw CheckpointError("checkpoint: trailing header bytes");

    std::map<std::string, DenseMatrix> tensors;
    const std::uint32_t count = r.u32();
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t len = r.u32();
        if (len > 4096) throw CheckpointError("checkpoint: implausible tensor name length");
        std::string name = r.bytes(len);
        const std::uint64_t rows = r.u64();
        const std::uint64_t cols = r.u64();
        if (rows != 0 && cols > (std::uint64_t{1} << 40) / rows) throw CheckpointError("checkpoint: implausible tensor size");
        std::vector<double> data(rows * cols);
        for (double& v : data) v = r.f64();
        try {
            tensors.emplace(std::move(name), DenseMatrix(rows, cols, std::move(data)));
        } catch (const std::exception& e) {
            throw CheckpointError(std::string("checkpoint: ") + e.what());
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("checkpoint: trailing bytes after the last tensor");

    auto take = [&](const std::string& name) {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw CheckpointError("checkpoint: missing tensor " + name);
        DenseMatrix t = std::move(it->second);
        tensors.erase(it);
        return t;
    };
    for (std::uint32_t l = 0; l < L; ++l) {
        auto& layer = m.layers[l];
        for (std::uint32_t i = 0; i < N; ++i) {
            const std::string base = "layer" + std::to_string(l) + ".rel" + std::to_string(i) + ".";
            layer.relations[i].W = take(base + "W");
            if (uses_ua(layer.b_form)) layer.relations[i].omega_a = take(base + "omega_a");
            if (uses_u(layer.b_form)) layer.relations[i].omega_b = take(base + "omega_b");
        }
    }
    for (std::size_t l = 0; l < m.inter.size(); ++l) {
        if (!m.inter[l]) continue;
        m.inter[l]->weight = take("inter" + std::to_string(l) + ".weight");
        m.inter[l]->bias = take("inter" + std::to_string(l) + ".bias");
    }
    m.head.theta = take("head.theta");
    if (m.head.kind == HeadKind::mlp) {
        m.head.bias1 = take("head.bias1");
        m.head.theta2 = take("head.theta2");
        m.head.bias2 = take("head.bias2");
    }
    if (has_u) m.learnable_u = take("learnable_u");
    if (!tensors.empty()) throw CheckpointError("checkpoint: unexpected tensor " + tensors.begin()->first);
    for (std::uint32_t l = 0; l < L; ++l) {
        if (m.layers[l].state_dim() != dims[l].first || m.layers[l].input_dim() != dims[l].second)
            throw CheckpointError("checkpoint: tensor shapes disagree with header dims");
    }
    try {
        m.validate();
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint: ") + e.what());
    }
    return m;
}

IgnnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
    return load_checkpoint(in);
}

}  // namespace ignn
