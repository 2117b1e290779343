#pragma once

#include "llmsast/cwe_id.hpp"
#include "llmsast/error.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace llmsast {

struct TestCase {
    std::string case_id;
    CweId expected_cwe{1};
    bool vulnerable = false;
    std::string relative_path;
    std::string source_text;
};

/// One manifest record. `digest` is the SHA-256 of the normalized file.
struct ManifestEntry {
    std::string case_id;
    CweId expected_cwe{1};
    bool vulnerable = false;
    std::string path;
    std::string digest;

    bool operator==(const ManifestEntry&) const = default;
};

struct CorpusManifest {
    std::vector<ManifestEntry> cases; ///< sorted by case_id
    std::uint64_t seed = 0;
    std::uint32_t per_cwe = 0; ///< 0 when the manifest is not a selection

    /// Per CWE: (vulnerable, clean).
    std::map<CweId, std::pair<std::size_t, std::size_t>> counts() const;
    const ManifestEntry* find(std::string_view case_id) const;

    /// JSON lines: a header object, then one object per case.
    std::string to_jsonl() const;
    static CorpusManifest from_jsonl(std::string_view text);
    std::string digest() const;

    bool operator==(const CorpusManifest&) const = default;
};

CorpusManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const CorpusManifest& m, const std::filesystem::path& path);

class RenameError : public Error {
public:
    using Error::Error;
};

class SelectionError : public Error {
public:
    using Error::Error;
};

/// A case that cannot be turned into a vulnerable/clean pair.
class FilteredCase : public Error {
public:
    using Error::Error;
};

/// Removes line and block comments. Literal contents are untouched. Block
/// comments keep their line breaks so code stays on its original line.
/// Throws java::LexError on unterminated comments or literals.
std::string strip_comments(std::string_view source);

/// Ordered identifier rewrite rules. Matching is case-insensitive; the first
/// letter of a replacement takes the case of the matched text.
class HintLexicon {
public:
    enum class Kind {
        substring, ///< anywhere in an identifier
        word,      ///< whole camelCase / snake_case segment only
        regex,     ///< ECMAScript pattern, matched case-insensitively
    };
    struct Rule {
        Kind kind;
        std::string pattern;
        std::string replacement;

        bool operator==(const Rule&) const = default;
    };

    HintLexicon() = default;
    /// Throws ConfigError if a replacement is not identifier-safe or would
    /// itself be rewritten.
    explicit HintLexicon(std::vector<Rule> rules);

    static HintLexicon defaults();
    /// Tab-separated `kind pattern replacement`; '#' starts a comment line.
    static HintLexicon parse(std::string_view tsv);
    static HintLexicon load(const std::filesystem::path& path);

    const std::vector<Rule>& rules() const { return rules_; }

    /// Applies all rules until nothing changes.
    std::string apply(std::string_view identifier) const;
    bool has_hint(std::string_view identifier) const { return apply(identifier) != identifier; }

private:
    std::string apply_once(std::string_view identifier) const;

    std::vector<Rule> rules_;
    std::vector<std::regex> compiled_;
};

/// Rewrites every identifier the lexicon touches. Identifiers in `fixed` are
/// replaced verbatim first. Package and import declarations are left alone.
/// Throws RenameError when a new name collides with another identifier.
std::string rename_hints(std::string_view source, const HintLexicon& lexicon,
                         const std::map<std::string, std::string>& fixed = {});

/// Identifiers outside package/import declarations that still carry "good",
/// "bad" or "cwe<digits>" (case-insensitive).
std::vector<std::string> hint_leaks(std::string_view source, bool include_package = false);

struct SplitCase {
    std::string class_name;
    CweId cwe{1};
    std::string vulnerable_source;
    std::string clean_source;
};

/// Cuts a comment-free single-file Juliet case into a file holding the shared
/// and bad* members and one holding the shared and good* members.
/// Throws FilteredCase when the file spans several files or lacks one side.
SplitCase split_case(std::string_view file_name, std::string_view source);

/// True for Juliet file names belonging to multi-file cases (61a, _bad, ...).
bool is_multi_file_name(std::string_view file_stem);
std::optional<CweId> cwe_from_file_name(std::string_view file_name);

/// Uniform integer in [0, bound) from mt19937_64 by rejection sampling, so
/// the sequence is fixed by the engine alone and not by the standard library's
/// distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Draws per_cwe vulnerable and per_cwe clean cases for every CWE present.
/// Throws SelectionError naming the first CWE with too few cases.
CorpusManifest select_subset(const CorpusManifest& manifest, std::uint32_t per_cwe, std::uint64_t seed);

/// Rewrites the package declaration (insert if absent, drop if `package_override`
/// is empty) and removes leading blanks from every line.
std::string prepare_for_llm(std::string_view source, std::string_view package_override);

struct PrepOptions {
    std::uint64_t seed = 0;
    std::optional<std::uint32_t> per_cwe;
    HintLexicon lexicon = HintLexicon::defaults();
};

struct Exclusion {
    std::string path;
    std::string reason;
};

struct PrepReport {
    CorpusManifest all;      ///< every normalized case
    CorpusManifest selected; ///< equals `all` when no per_cwe is given
    std::vector<Exclusion> excluded;
};

/// Normalizes every `CWE*.java` under raw_root into out_root and writes
/// out_root/manifest.jsonl (the selection) and out_root/all_cases.jsonl.
PrepReport prepare_corpus(const std::filesystem::path& raw_root, const std::filesystem::path& out_root,
                          const PrepOptions& options);

/// Reads a case's normalized source from the corpus root.
TestCase load_case(const std::filesystem::path& corpus_root, const ManifestEntry& entry);

} // namespace llmsast
