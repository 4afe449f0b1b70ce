#pragma once

// Text formats:
//
// Graph (DIMACS-like, 0-indexed):
//   c metaco graph format_version 1
//   p <n> <m>
//   e <u> <v>            (m lines)
// Other `c` lines are comments; "p edge <n> <m>" is accepted as well.
//
// Manifest (one instance per line):
//   # metaco manifest format_version 1
//   <file> <split> [<problem>:<kind>:<value> ...]
// e.g. "rrg_0003.graph test mis:exact:41". Kinds: exact, bound, best-found.
//
// Checkpoint:
//   metaco-checkpoint
//   format_version 1
//   config layers <L> hidden_dim <H> mlp_depth <D> input_dim <I> epsilon <e>
//   fingerprint <hex>
//   tensors <count>
//   tensor <name> <rows> <cols>
//   <row values, 17 significant digits>
//   ...
//   end

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaco/gin.hpp"
#include "metaco/graph.hpp"
#include "metaco/problems.hpp"
#include "metaco/training.hpp"

namespace metaco {

inline constexpr int kGraphFormatVersion = 1;
inline constexpr int kManifestFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;

/// Malformed input. The message carries "<source>:<line>: ..." diagnostics.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input written by a newer format version.
class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

void write_graph(std::ostream& out, const Graph& g);
Graph read_graph(std::istream& in, const std::string& source = "<graph>");
void save_graph(const std::filesystem::path& path, const Graph& g);
Graph load_graph(const std::filesystem::path& path);

/// Whitespace-separated edge list with arbitrary node labels ('#' or '%'
/// comments). Labels are mapped to dense ids in order of first appearance.
struct LabeledGraph {
    Graph graph;
    std::vector<std::string> labels;  // dense id -> original label
};
LabeledGraph load_edge_list(const std::filesystem::path& path);

struct Reference {
    ProblemKind problem = ProblemKind::MaxIndependentSet;
    std::string kind;  // exact | bound | best-found
    double value = 0.0;

    friend bool operator==(const Reference&, const Reference&) = default;
};

struct ManifestEntry {
    std::string file;
    std::string split;  // train | val | test
    std::vector<Reference> references;

    const Reference* find(ProblemKind problem) const;
    /// Replaces any existing reference for the same problem.
    void set(const Reference& ref);

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

void write_manifest(std::ostream& out, const Manifest& m);
Manifest read_manifest(std::istream& in, const std::string& source = "<manifest>");

inline constexpr const char* kManifestName = "manifest.txt";

/// A directory of graph files plus its manifest.
struct Dataset {
    std::filesystem::path dir;
    Manifest manifest;
    std::vector<Graph> graphs;  // aligned with manifest.entries

    static Dataset load(const std::filesystem::path& dir);
    void save_manifest() const;

    /// Instances of one split with references for `problem` attached.
    std::vector<Instance> instances(const std::string& split, ProblemKind problem) const;
};

void save_checkpoint(std::ostream& out, const ModelParams& params);
ModelParams load_checkpoint(std::istream& in, const std::string& source = "<checkpoint>");
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace metaco
