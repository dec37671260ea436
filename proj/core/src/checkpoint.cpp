#include "hades/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hades {

namespace {

constexpr char kMagic[8] = {'H', 'A', 'D', 'E', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

std::string shape_str(const std::vector<std::size_t>& s) {
    std::ostringstream os;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    return os.str();
}

std::vector<std::size_t> parse_shape(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, 'x')) out.push_back(std::stoull(part));
    return out;
}

}  // namespace

std::string config_to_text(const ModelConfig& cfg) {
    std::ostringstream os;
    os << "d = " << cfg.d << "\n";
    os << "M = " << cfg.M << "\n";
    os << "H = " << cfg.H << "\n";
    os << "S = " << cfg.S << "\n";
    os << "P = " << cfg.P << "\n";
    os << "N = " << cfg.N << "\n";
    os << "d_conv = " << cfg.d_conv << "\n";
    os << "L = " << cfg.L << "\n";
    os << "V = " << cfg.V << "\n";
    os << "gamma = " << cfg.gamma << "\n";
    os << "lambda1 = " << cfg.lambda1 << "\n";
    os << "lambda2 = " << cfg.lambda2 << "\n";
    os << "epsilon = " << cfg.epsilon << "\n";
    os << "mode = " << router_mode_to_string(cfg.mode) << "\n";
    os << "tie_embeddings = " << (cfg.tie_embeddings ? 1 : 0) << "\n";
    os << "router_seed = " << cfg.router_seed << "\n";
    os << "pos_norm = " << cfg.pos_norm << "\n";
    return os.str();
}

ModelConfig config_from_text(const std::string& text) {
    ModelConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::map<std::string, bool> seen;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("tensor ", 0) == 0) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config: bad line: " + line);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        seen[key] = true;
        if (key == "d") cfg.d = std::stoull(val);
        else if (key == "M") cfg.M = std::stoull(val);
        else if (key == "H") cfg.H = std::stoull(val);
        else if (key == "S") cfg.S = std::stoull(val);
        else if (key == "P") cfg.P = std::stoull(val);
        else if (key == "N") cfg.N = std::stoull(val);
        else if (key == "d_conv") cfg.d_conv = std::stoull(val);
        else if (key == "L") cfg.L = std::stoull(val);
        else if (key == "V") cfg.V = std::stoull(val);
        else if (key == "gamma") cfg.gamma = std::stod(val);
        else if (key == "lambda1") cfg.lambda1 = std::stod(val);
        else if (key == "lambda2") cfg.lambda2 = std::stod(val);
        else if (key == "epsilon") cfg.epsilon = std::stod(val);
        else if (key == "mode") cfg.mode = router_mode_from_string(val);
        else if (key == "tie_embeddings") cfg.tie_embeddings = (std::stoi(val) != 0);
        else if (key == "router_seed") cfg.router_seed = std::stoull(val);
        else if (key == "pos_norm") cfg.pos_norm = std::stod(val);
        else throw std::runtime_error("config: unknown key: " + key);
    }
    cfg.validate();
    return cfg;
}

std::string config_hash(const ModelConfig& cfg) {
    const std::string text = config_to_text(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

void save_checkpoint(const Model& m, const std::string& path) {
    std::ostringstream header;
    header << config_to_text(m.cfg);
    std::uint64_t offset = 0;
    visit_params(const_cast<Model&>(m),
                 [&](const std::string& name, std::vector<double>& t,
                     const std::vector<std::size_t>& shape) {
                     header << "tensor " << name << " " << shape_str(shape) << " "
                            << offset << "\n";
                     offset += t.size() * sizeof(float);
                 });
    const std::string htext = header.str();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    f.write(kMagic, 8);
    put_u32(f, kVersion);
    put_u32(f, static_cast<std::uint32_t>(htext.size()));
    f.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    visit_params(const_cast<Model&>(m),
                 [&](const std::string&, std::vector<double>& t,
                     const std::vector<std::size_t>&) {
                     std::vector<float> buf(t.size());
                     for (std::size_t i = 0; i < t.size(); ++i)
                         buf[i] = static_cast<float>(t[i]);
                     f.write(reinterpret_cast<const char*>(buf.data()),
                             static_cast<std::streamsize>(buf.size() * sizeof(float)));
                 });
    if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const std::uint32_t version = get_u32(f);
    if (version != kVersion) throw std::runtime_error("checkpoint: version mismatch");
    const std::uint32_t hlen = get_u32(f);
    std::string htext(hlen, '\0');
    f.read(htext.data(), hlen);
    if (!f) throw std::runtime_error("checkpoint: truncated header");

    ModelConfig cfg = config_from_text(htext);

    // Parse and validate the tensor directory: contiguous, non-overlapping.
    struct Entry {
        std::string name;
        std::vector<std::size_t> shape;
        std::uint64_t offset;
    };
    std::vector<Entry> dir;
    {
        std::istringstream is(htext);
        std::string line;
        while (std::getline(is, line)) {
            if (line.rfind("tensor ", 0) != 0) continue;
            std::istringstream ls(line);
            std::string kw, name, shape;
            std::uint64_t off;
            ls >> kw >> name >> shape >> off;
            if (!ls) throw std::runtime_error("checkpoint: bad directory line: " + line);
            dir.push_back({name, parse_shape(shape), off});
        }
    }
    std::uint64_t expect = 0;
    for (const auto& e : dir) {
        if (e.offset != expect)
            throw std::runtime_error("checkpoint: directory offsets overlap or gap at " + e.name);
        expect += Tensor::numel(e.shape) * sizeof(float);
    }
    const auto payload_start = f.tellg();
    f.seekg(0, std::ios::end);
    const std::uint64_t payload_size =
        static_cast<std::uint64_t>(f.tellg() - payload_start);
    if (payload_size != expect)
        throw std::runtime_error("checkpoint: payload size mismatch");
    f.seekg(payload_start);

    Model m = make_model(cfg);
    std::size_t idx = 0;
    visit_params(m, [&](const std::string& name, std::vector<double>& t,
                        const std::vector<std::size_t>&) {
        if (idx >= dir.size() || dir[idx].name != name)
            throw std::runtime_error("checkpoint: directory/model mismatch at " + name);
        const std::size_t n = Tensor::numel(dir[idx].shape);
        if (n != t.size()) throw std::runtime_error("checkpoint: shape mismatch at " + name);
        std::vector<float> buf(n);
        f.read(reinterpret_cast<char*>(buf.data()),
               static_cast<std::streamsize>(n * sizeof(float)));
        if (!f) throw std::runtime_error("checkpoint: truncated payload at " + name);
        for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(buf[i]);
        ++idx;
    });
    if (idx != dir.size()) throw std::runtime_error("checkpoint: extra directory entries");
    return m;
}

}  // namespace hades
