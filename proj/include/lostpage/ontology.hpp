#pragma once

#include <atomic>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lostpage {

/// Ordered category labels, e.g. Computers/Computer_Science/Academic_Departments.
class CategoryPath {
 public:
  CategoryPath() = default;
  /// Throws ParseError if a label is empty or contains '/'.
  explicit CategoryPath(std::vector<std::string> labels);
  /// Parses "A/B/C". Empty pieces (doubled or trailing slashes) are ignored.
  static CategoryPath parse(std::string_view serialized);

  const std::vector<std::string>& labels() const { return labels_; }
  size_t depth() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::string& top_level() const { return labels_.front(); }

  /// First `n` labels (clamped to depth()).
  CategoryPath prefix(size_t n) const;
  /// True if this path is a proper prefix of `other`.
  bool is_ancestor_of(const CategoryPath& other) const;
  /// Number of leading labels shared with `other`.
  size_t common_prefix_length(const CategoryPath& other) const;

  std::string str() const;

  friend auto operator<=>(const CategoryPath&, const CategoryPath&) = default;
  friend bool operator==(const CategoryPath&, const CategoryPath&) = default;

 private:
  std::vector<std::string> labels_;
};

struct OntologyEntry {
  CategoryPath category;
  std::string uri;
  std::string surt;
  std::optional<std::string> title;
  std::optional<std::string> description;
};

/// Top-level categories kept after ingestion filtering.
const std::set<std::string>& default_retained_top_levels();
/// World, Regional, Netscape, Kids_and_Teens, Adult.
const std::set<std::string>& default_excluded_top_levels();

/// Entries indexed by their full category path and by SURT. Immutable once
/// built; every SURT appears once (first occurrence wins).
class CategoryIndex {
 public:
  CategoryIndex() = default;
  /// Builds the index; entries whose SURT was already seen are dropped and
  /// counted in *duplicates when given.
  static CategoryIndex from_entries(std::vector<OntologyEntry> entries, size_t* duplicates = nullptr);

  const std::vector<OntologyEntry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Serialized path -> positions into entries(), in insertion order.
  const std::map<std::string, std::vector<size_t>>& by_category() const { return by_category_; }
  /// Entries filed under exactly this path (not its descendants).
  std::vector<const OntologyEntry*> in_category(const CategoryPath& path) const;
  /// Entries filed under this path or any descendant.
  std::vector<const OntologyEntry*> under(const CategoryPath& path) const;
  const OntologyEntry* find_surt(std::string_view surt) const;
  std::vector<CategoryPath> categories() const;

  /// Writes the TSV form to `tsv` and one SURT per line to `tsv` + ".surt".
  void save(const std::filesystem::path& tsv) const;
  /// Reads an index written by save(). A missing sidecar means SURTs are
  /// recomputed.
  static CategoryIndex load(const std::filesystem::path& tsv);

 private:
  std::vector<OntologyEntry> entries_;
  std::map<std::string, std::vector<size_t>> by_category_;
  std::unordered_map<std::string, size_t> by_surt_;
};

enum class DmozFormat { Rdf, Tsv };
DmozFormat parse_dmoz_format(std::string_view name);

struct IngestOptions {
  std::set<std::string> excluded_top_levels = default_excluded_top_levels();
  /// Empty means every non-excluded top level is kept.
  std::set<std::string> retained_top_levels = default_retained_top_levels();
};

struct IngestReport {
  size_t records = 0;
  size_t kept = 0;
  size_t missing_fields = 0;
  size_t excluded_category = 0;
  size_t unretained_category = 0;
  size_t duplicates = 0;
  size_t malformed = 0;
  std::vector<std::string> warnings;  // first 100 malformed-record messages
};

/// Reads a DMOZ RDF dump (ExternalPage/topic vocabulary) or the TSV fixture
/// format. Records without URI or category, and records in excluded or
/// non-retained top-level categories, are dropped. Malformed records are
/// skipped and counted; a stream that ends inside a record throws IoError.
CategoryIndex ingest_dmoz(std::istream& source, DmozFormat format, const IngestOptions& options = {},
                          IngestReport* report = nullptr);

/// A page in a secondary ontology that names a URI as its official website.
struct SecondaryHit {
  std::string page;
  std::vector<std::string> categories;
  std::vector<std::string> members;  // official URIs of pages in the same categories
};

/// Secondary ontology lookup (Wikipedia-style). Implementations must be
/// safe for concurrent calls. Throws IoError on provider failure.
class OntologyProvider {
 public:
  virtual ~OntologyProvider() = default;
  virtual std::string name() const = 0;
  virtual std::optional<SecondaryHit> find_official(std::string_view uri) const = 0;
};

/// Line-delimited JSON records: {"official_uri", "categories", "members",
/// optional "page"}. Matched by SURT.
class FixtureOntologyProvider : public OntologyProvider {
 public:
  static std::shared_ptr<FixtureOntologyProvider> load(const std::filesystem::path& jsonl);
  static std::shared_ptr<FixtureOntologyProvider> parse(std::istream& in);

  std::string name() const override { return "wikipedia-fixture"; }
  std::optional<SecondaryHit> find_official(std::string_view uri) const override;
  size_t size() const { return records_.size(); }

 private:
  std::unordered_map<std::string, SecondaryHit> records_;
};

enum class LookupSource { PrimaryIndex, SecondaryProvider };
std::string_view to_string(LookupSource s);

struct LookupHit {
  LookupSource source = LookupSource::PrimaryIndex;
  std::vector<CategoryPath> categories;
  /// Same-category entries (the requested URI included when it is one).
  std::vector<OntologyEntry> entries;
};

struct LookupOutcome {
  std::optional<LookupHit> hit;
  bool degraded = false;  // the secondary provider failed
  std::string warning;
};

/// Per-source hit counters; safe to share across threads.
struct LookupCounters {
  std::atomic<size_t> primary_hits{0};
  std::atomic<size_t> secondary_hits{0};
  std::atomic<size_t> misses{0};
  std::atomic<size_t> provider_failures{0};
};

/// Looks the URI up by SURT in the index, then asks the secondary provider.
/// Secondary members are returned as synthesized entries filed under the
/// first secondary category.
LookupOutcome lookup_requested(const CategoryIndex& index, const OntologyProvider* secondary,
                               std::string_view uri, LookupCounters* counters = nullptr);

}  // namespace lostpage
