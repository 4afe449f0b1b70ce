#include "metaco/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace metaco {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
    throw FormatError(source + ":" + std::to_string(line) + ": " + what);
}

std::uint64_t parse_u64(const std::string& tok, const std::string& source, std::size_t line, const char* field) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        fail(source, line, std::string("field '") + field + "': expected a non-negative integer, got '" + tok + "'");
    return v;
}

double parse_double(const std::string& tok, const std::string& source, std::size_t line, const char* field) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size())
        fail(source, line, std::string("field '") + field + "': expected a number, got '" + tok + "'");
    return v;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_version(std::uint64_t found, int supported, const std::string& what, const std::string& source,
                   std::size_t line) {
    if (found > static_cast<std::uint64_t>(supported))
        throw VersionError(source + ":" + std::to_string(line) + ": " + what + " format_version " +
                           std::to_string(found) + " is newer than supported version " + std::to_string(supported));
    if (found == 0) fail(source, line, what + " format_version must be >= 1");
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.exceptions(std::ios::badbit | std::ios::failbit);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- graphs

void write_graph(std::ostream& out, const Graph& g) {
    out << "c metaco graph format_version " << kGraphFormatVersion << "\n";
    out << "p " << g.num_nodes() << " " << g.num_edges() << "\n";
    for (const auto& [u, v] : g.edges()) out << "e " << u << " " << v << "\n";
}

Graph read_graph(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::uint64_t> n, m;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "c") {
            if (tok.size() == 5 && tok[1] == "metaco" && tok[2] == "graph" && tok[3] == "format_version")
                check_version(parse_u64(tok[4], source, lineno, "format_version"), kGraphFormatVersion, "graph",
                              source, lineno);
            continue;
        }
        if (tok[0] == "p") {
            if (n) fail(source, lineno, "duplicate 'p' header");
            std::size_t off = (tok.size() == 4) ? 2 : 1;  // "p edge n m" or "p n m"
            if (tok.size() != 3 && tok.size() != 4) fail(source, lineno, "expected 'p <n> <m>'");
            n = parse_u64(tok[off], source, lineno, "n");
            m = parse_u64(tok[off + 1], source, lineno, "m");
            if (*n > 0xFFFFFFFFull) fail(source, lineno, "field 'n': too many nodes");
            edges.reserve(*m);
            continue;
        }
        if (tok[0] == "e") {
            if (!n) fail(source, lineno, "edge before 'p' header");
            if (tok.size() != 3) fail(source, lineno, "expected 'e <u> <v>'");
            auto u = parse_u64(tok[1], source, lineno, "u");
            auto v = parse_u64(tok[2], source, lineno, "v");
            if (u >= *n) fail(source, lineno, "field 'u': node " + tok[1] + " out of range [0, " + std::to_string(*n) + ")");
            if (v >= *n) fail(source, lineno, "field 'v': node " + tok[2] + " out of range [0, " + std::to_string(*n) + ")");
            edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
            continue;
        }
        fail(source, lineno, "unknown line type '" + tok[0] + "'");
    }
    if (!n) fail(source, lineno, "missing 'p <n> <m>' header");
    if (edges.size() != *m)
        fail(source, lineno,
             "header declares " + std::to_string(*m) + " edges but " + std::to_string(edges.size()) + " were listed");
    return Graph::from_edge_list(static_cast<std::size_t>(*n), edges);
}

void save_graph(const std::filesystem::path& path, const Graph& g) {
    auto out = open_out(path);
    write_graph(out, g);
}

Graph load_graph(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_graph(in, path.string());
}

LabeledGraph load_edge_list(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::unordered_map<std::string, NodeId> ids;
    LabeledGraph out;
    std::vector<Edge> edges;
    auto id_of = [&](const std::string& label) {
        auto [it, inserted] = ids.try_emplace(label, static_cast<NodeId>(out.labels.size()));
        if (inserted) out.labels.push_back(label);
        return it->second;
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = split_ws(line);
        if (tok.empty() || tok[0][0] == '#' || tok[0][0] == '%') continue;
        if (tok.size() < 2) fail(path.string(), lineno, "expected '<u> <v>'");
        NodeId u = id_of(tok[0]);
        NodeId v = id_of(tok[1]);
        edges.emplace_back(u, v);
    }
    out.graph = Graph::from_edge_list(out.labels.size(), edges);
    return out;
}

// -------------------------------------------------------------- manifests

const Reference* ManifestEntry::find(ProblemKind problem) const {
    for (const auto& r : references)
        if (r.problem == problem) return &r;
    return nullptr;
}

void ManifestEntry::set(const Reference& ref) {
    for (auto& r : references)
        if (r.problem == ref.problem) {
            r = ref;
            return;
        }
    references.push_back(ref);
}

void write_manifest(std::ostream& out, const Manifest& m) {
    out << "# metaco manifest format_version " << kManifestFormatVersion << "\n";
    for (const auto& e : m.entries) {
        if (e.file.find_first_of(" \t") != std::string::npos)
            throw std::invalid_argument("manifest file names must not contain whitespace: '" + e.file + "'");
        out << e.file << " " << e.split;
        for (const auto& r : e.references) out << " " << to_string(r.problem) << ":" << r.kind << ":" << fmt17(r.value);
        out << "\n";
    }
}

Manifest read_manifest(std::istream& in, const std::string& source) {
    Manifest m;
    std::string line;
    std::size_t lineno = 0;
    bool versioned = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0][0] == '#') {
            if (tok.size() == 5 && tok[1] == "metaco" && tok[2] == "manifest" && tok[3] == "format_version") {
                check_version(parse_u64(tok[4], source, lineno, "format_version"), kManifestFormatVersion, "manifest",
                              source, lineno);
                versioned = true;
            }
            continue;
        }
        if (tok.size() < 2) fail(source, lineno, "expected '<file> <split> [problem:kind:value ...]'");
        ManifestEntry e;
        e.file = tok[0];
        e.split = tok[1];
        for (std::size_t i = 2; i < tok.size(); ++i) {
            const auto& t = tok[i];
            auto c1 = t.find(':');
            auto c2 = c1 == std::string::npos ? c1 : t.find(':', c1 + 1);
            if (c2 == std::string::npos)
                fail(source, lineno, "field " + std::to_string(i + 1) + ": expected 'problem:kind:value', got '" + t + "'");
            Reference r;
            try {
                r.problem = parse_problem(t.substr(0, c1));
            } catch (const std::invalid_argument& ex) {
                fail(source, lineno, "field " + std::to_string(i + 1) + ": " + ex.what());
            }
            r.kind = t.substr(c1 + 1, c2 - c1 - 1);
            if (r.kind.empty()) fail(source, lineno, "field " + std::to_string(i + 1) + ": empty reference kind");
            r.value = parse_double(t.substr(c2 + 1), source, lineno, "value");
            e.references.push_back(std::move(r));
        }
        m.entries.push_back(std::move(e));
    }
    if (!versioned) fail(source, 1, "missing '# metaco manifest format_version' header");
    return m;
}

Dataset Dataset::load(const std::filesystem::path& dir) {
    Dataset d;
    d.dir = dir;
    auto mpath = dir / kManifestName;
    auto in = open_in(mpath);
    d.manifest = read_manifest(in, mpath.string());
    d.graphs.reserve(d.manifest.entries.size());
    for (const auto& e : d.manifest.entries) d.graphs.push_back(load_graph(dir / e.file));
    return d;
}

void Dataset::save_manifest() const {
    auto out = open_out(dir / kManifestName);
    write_manifest(out, manifest);
}

std::vector<Instance> Dataset::instances(const std::string& split, ProblemKind problem) const {
    std::vector<Instance> out;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        if (!split.empty() && e.split != split) continue;
        Instance inst{e.file, graphs[i], std::nullopt, {}};
        if (const auto* r = e.find(problem)) {
            inst.reference = r->value;
            inst.reference_kind = r->kind;
        }
        out.push_back(std::move(inst));
    }
    return out;
}

// ------------------------------------------------------------ checkpoints

void save_checkpoint(std::ostream& out, const ModelParams& params) {
    params.check_consistent();
    const auto& c = params.config;
    auto names = params.names();
    out << "metaco-checkpoint\n";
    out << "format_version " << kCheckpointFormatVersion << "\n";
    out << "config layers " << c.layers << " hidden_dim " << c.hidden_dim << " mlp_depth " << c.mlp_depth
        << " input_dim " << c.input_dim << " epsilon " << fmt17(c.epsilon) << " normalize "
        << (c.normalize ? 1 : 0) << " residual " << (c.residual ? 1 : 0) << "\n";
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(params.fingerprint));
    out << "fingerprint " << hex << "\n";
    out << "tensors " << params.tensors.size() << "\n";
    for (std::size_t k = 0; k < params.tensors.size(); ++k) {
        const auto& t = params.tensors[k];
        out << "tensor " << names[k] << " " << t.rows() << " " << t.cols() << "\n";
        for (std::size_t r = 0; r < t.rows(); ++r) {
            for (std::size_t col = 0; col < t.cols(); ++col) {
                if (col) out << ' ';
                out << fmt17(t(r, col));
            }
            out << "\n";
        }
    }
    out << "end\n";
}

ModelParams load_checkpoint(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> std::vector<std::string> {
        while (std::getline(in, line)) {
            ++lineno;
            auto tok = split_ws(line);
            if (!tok.empty()) return tok;
        }
        fail(source, lineno, "unexpected end of file");
    };

    auto tok = next();
    if (tok.size() != 1 || tok[0] != "metaco-checkpoint") fail(source, lineno, "not a metaco checkpoint");
    tok = next();
    if (tok.size() != 2 || tok[0] != "format_version") fail(source, lineno, "expected 'format_version <v>'");
    check_version(parse_u64(tok[1], source, lineno, "format_version"), kCheckpointFormatVersion, "checkpoint", source,
                  lineno);

    tok = next();
    if (tok.size() != 15 || tok[0] != "config") fail(source, lineno, "expected 'config' line with 7 key/value pairs");
    GinConfig cfg;
    const char* keys[] = {"layers", "hidden_dim", "mlp_depth", "input_dim", "epsilon", "normalize", "residual"};
    for (int k = 0; k < 7; ++k)
        if (tok[1 + 2 * k] != keys[k])
            fail(source, lineno, std::string("config field ") + std::to_string(k + 1) + ": expected '" + keys[k] +
                                     "', got '" + tok[1 + 2 * k] + "'");
    cfg.layers = parse_u64(tok[2], source, lineno, "layers");
    cfg.hidden_dim = parse_u64(tok[4], source, lineno, "hidden_dim");
    cfg.mlp_depth = parse_u64(tok[6], source, lineno, "mlp_depth");
    cfg.input_dim = parse_u64(tok[8], source, lineno, "input_dim");
    cfg.epsilon = parse_double(tok[10], source, lineno, "epsilon");
    for (int k : {12, 14}) {
        if (tok[k] != "0" && tok[k] != "1")
            fail(source, lineno, tok[k - 1] + ": expected 0 or 1, got '" + tok[k] + "'");
    }
    cfg.normalize = tok[12] == "1";
    cfg.residual = tok[14] == "1";
    try {
        cfg.validate();
    } catch (const std::exception& ex) {
        fail(source, lineno, std::string("invalid config: ") + ex.what());
    }

    tok = next();
    if (tok.size() != 2 || tok[0] != "fingerprint") fail(source, lineno, "expected 'fingerprint <hex>'");
    std::uint64_t fp = 0;
    {
        auto [p, ec] = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), fp, 16);
        if (ec != std::errc() || p != tok[1].data() + tok[1].size())
            fail(source, lineno, "field 'fingerprint': expected hex, got '" + tok[1] + "'");
    }
    if (fp != cfg.fingerprint()) fail(source, lineno, "fingerprint does not match config");

    ModelParams params;
    params.config = cfg;
    params.fingerprint = fp;
    tok = next();
    if (tok.size() != 2 || tok[0] != "tensors") fail(source, lineno, "expected 'tensors <count>'");
    auto count = parse_u64(tok[1], source, lineno, "count");
    auto reference = init_params(cfg, 0);
    auto names = reference.names();
    if (count != names.size())
        fail(source, lineno, "config implies " + std::to_string(names.size()) + " tensors, file declares " + tok[1]);
    for (std::size_t k = 0; k < count; ++k) {
        tok = next();
        if (tok.size() != 4 || tok[0] != "tensor") fail(source, lineno, "expected 'tensor <name> <rows> <cols>'");
        if (tok[1] != names[k]) fail(source, lineno, "expected tensor '" + names[k] + "', got '" + tok[1] + "'");
        auto rows = parse_u64(tok[2], source, lineno, "rows");
        auto cols = parse_u64(tok[3], source, lineno, "cols");
        const auto& want = reference.tensors[k];
        if (rows != want.rows() || cols != want.cols())
            fail(source, lineno, "tensor '" + names[k] + "' has shape " + tok[2] + "x" + tok[3] + ", expected " +
                                     std::to_string(want.rows()) + "x" + std::to_string(want.cols()));
        ad::Tensor t(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            tok = next();
            if (tok.size() != cols)
                fail(source, lineno, "tensor '" + names[k] + "' row " + std::to_string(r) + ": expected " +
                                         std::to_string(cols) + " values, got " + std::to_string(tok.size()));
            for (std::size_t c = 0; c < cols; ++c) t(r, c) = parse_double(tok[c], source, lineno, "value");
        }
        params.tensors.push_back(std::move(t));
    }
    tok = next();
    if (tok.size() != 1 || tok[0] != "end") fail(source, lineno, "expected 'end'");
    params.check_consistent();
    return params;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    auto out = open_out(path);
    save_checkpoint(out, params);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    auto in = open_in(path);
    return load_checkpoint(in, path.string());
}

}  // namespace metaco
