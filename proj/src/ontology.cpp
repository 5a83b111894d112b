#include "lostpage/ontology.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lostpage/error.hpp"
#include "lostpage/uri.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

constexpr size_t kMaxWarnings = 100;

std::string clean_field(std::string_view s) {
  std::string out(detail::trim(s));
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::optional<std::string> non_empty(std::string_view s) {
  std::string t = clean_field(s);
  if (t.empty()) return std::nullopt;
  return t;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += s[i];
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    bool ok = true;
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (name.size() > 1 && name[0] == '#') {
      try {
        unsigned long cp = (name[1] == 'x' || name[1] == 'X')
                               ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                               : std::stoul(std::string(name.substr(1)), nullptr, 10);
        append_utf8(out, cp);
      } catch (const std::exception&) {
        ok = false;
      }
    } else {
      ok = false;
    }
    if (!ok) {
      out += s[i];
      continue;
    }
    i = semi;
  }
  return out;
}

/// Raw record before filtering; shared by both input formats.
struct RawRecord {
  std::string category;
  std::string uri;
  std::string title;
  std::string description;
};

class Ingestor {
 public:
  Ingestor(const IngestOptions& options, IngestReport& report) : options_(options), report_(report) {}

  void malformed(const std::string& message) {
    ++report_.malformed;
    if (report_.warnings.size() < kMaxWarnings) report_.warnings.push_back(message);
  }

  void add(const RawRecord& r) {
    ++report_.records;
    std::string category = clean_field(r.category);
    std::string uri = clean_field(r.uri);
    if (category.starts_with("Top/")) category.erase(0, 4);
    if (category == "Top") category.clear();
    if (uri.empty() || category.empty()) {
      ++report_.missing_fields;
      return;
    }
    CategoryPath path = CategoryPath::parse(category);
    if (path.empty()) {
      ++report_.missing_fields;
      return;
    }
    if (options_.excluded_top_levels.count(path.top_level())) {
      ++report_.excluded_category;
      return;
    }
    if (!options_.retained_top_levels.empty() && !options_.retained_top_levels.count(path.top_level())) {
      ++report_.unretained_category;
      return;
    }
    OntologyEntry e;
    try {
      ParsedUri parsed = parse_uri(normalize_input_uri(uri));
      e.uri = parsed.to_string();
      e.surt = canonicalize_surt(e.uri);
    } catch (const ParseError& err) {
      malformed("record " + std::to_string(report_.records) + ": " + err.what());
      return;
    }
    e.category = std::move(path);
    e.title = non_empty(r.title);
    e.description = non_empty(r.description);
    entries_.push_back(std::move(e));
  }

  CategoryIndex finish() {
    size_t dups = 0;
    CategoryIndex index = CategoryIndex::from_entries(std::move(entries_), &dups);
    report_.duplicates += dups;
    report_.kept = index.size();
    return index;
  }

 private:
  const IngestOptions& options_;
  IngestReport& report_;
  std::vector<OntologyEntry> entries_;
};

std::optional<std::string> attribute(std::string_view tag, std::string_view name) {
  size_t pos = 0;
  while ((pos = tag.find(name, pos)) != std::string_view::npos) {
    size_t p = pos + name.size();
    bool boundary = pos > 0 && std::isspace(static_cast<unsigned char>(tag[pos - 1]));
    while (p < tag.size() && std::isspace(static_cast<unsigned char>(tag[p]))) ++p;
    if (boundary && p < tag.size() && tag[p] == '=') {
      ++p;
      while (p < tag.size() && std::isspace(static_cast<unsigned char>(tag[p]))) ++p;
      if (p < tag.size() && (tag[p] == '"' || tag[p] == '\'')) {
        char q = tag[p];
        size_t end = tag.find(q, p + 1);
        if (end == std::string_view::npos) return std::nullopt;
        return decode_entities(tag.substr(p + 1, end - p - 1));
      }
    }
    pos += name.size();
  }
  return std::nullopt;
}

/// Text of the first <name>...</name> element inside `block`.
std::optional<std::string> element_text(std::string_view block, std::string_view name) {
  std::string open = "<" + std::string(name);
  size_t pos = 0;
  while ((pos = block.find(open, pos)) != std::string_view::npos) {
    size_t after = pos + open.size();
    if (after < block.size() && (block[after] == '>' || std::isspace(static_cast<unsigned char>(block[after])) ||
                                 block[after] == '/')) {
      size_t gt = block.find('>', after);
      if (gt == std::string_view::npos) return std::nullopt;
      if (block[gt - 1] == '/') return std::string();
      std::string close = "</" + std::string(name) + ">";
      size_t end = block.find(close, gt + 1);
      if (end == std::string_view::npos) return std::nullopt;
      std::string_view text = block.substr(gt + 1, end - gt - 1);
      if (text.starts_with("<![CDATA[") && text.ends_with("]]>")) {
        return std::string(text.substr(9, text.size() - 12));
      }
      return decode_entities(text);
    }
    pos = after;
  }
  return std::nullopt;
}

void ingest_rdf(std::istream& in, Ingestor& ingestor) {
  static constexpr std::string_view kOpen = "<ExternalPage";
  static constexpr std::string_view kClose = "</ExternalPage>";
  std::string buffer;
  std::vector<char> chunk(1 << 20);
  bool eof = false;
  size_t record = 0;
  while (true) {
    size_t start = buffer.find(kOpen);
    if (start == std::string::npos) {
      if (eof) return;
      // Keep a tail in case the opening tag straddles the chunk boundary.
      if (buffer.size() > kOpen.size()) buffer.erase(0, buffer.size() - kOpen.size());
    } else {
      size_t end = buffer.find(kClose, start);
      if (end != std::string::npos) {
        std::string_view block(buffer.data() + start, end - start);
        ++record;
        size_t gt = block.find('>');
        RawRecord r;
        if (gt == std::string_view::npos) {
          ingestor.malformed("ExternalPage " + std::to_string(record) + ": unterminated start tag");
        } else {
          std::string_view tag = block.substr(0, gt);
          if (auto about = attribute(tag, "about")) r.uri = *about;
          std::string_view body = block.substr(gt + 1);
          r.category = element_text(body, "topic").value_or("");
          r.title = element_text(body, "d:Title").value_or("");
          r.description = element_text(body, "d:Description").value_or("");
          ingestor.add(r);
        }
        buffer.erase(0, end + kClose.size());
        continue;
      }
      if (eof) throw IoError("truncated RDF stream: ExternalPage " + std::to_string(record + 1) + " is not closed");
      if (start > 0) buffer.erase(0, start);
    }
    in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    std::streamsize got = in.gcount();
    if (got <= 0) {
      eof = true;
    } else {
      buffer.append(chunk.data(), static_cast<size_t>(got));
    }
    if (in.bad()) throw IoError("read error in RDF stream");
  }
}

void ingest_tsv(std::istream& in, Ingestor& ingestor) {
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool terminated = !in.eof();
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::split_keep(line, '\t');
    if (!terminated && fields.size() < 4) {
      throw IoError("truncated TSV stream at line " + std::to_string(line_no));
    }
    if (fields.size() < 2 || fields.size() > 4) {
      ingestor.malformed("line " + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
                         std::to_string(fields.size()));
      continue;
    }
    RawRecord r;
    r.category = fields[0];
    r.uri = fields[1];
    if (fields.size() > 2) r.title = fields[2];
    if (fields.size() > 3) r.description = fields[3];
    ingestor.add(r);
  }
  if (in.bad()) throw IoError("read error in TSV stream");
}

std::string sanitize_label(std::string_view label) {
  std::string out(detail::trim(label));
  for (char& c : out) {
    if (c == '/') c = '_';
    if (c == ' ') c = '_';
  }
  return out;
}

}  // namespace

CategoryPath::CategoryPath(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (const auto& l : labels_) {
    if (l.empty()) throw ParseError("category", "empty label");
    if (l.find('/') != std::string::npos) throw ParseError("category", "label contains '/': " + l);
  }
}

CategoryPath CategoryPath::parse(std::string_view serialized) {
  std::vector<std::string> labels;
  for (auto piece : detail::split(serialized, '/')) {
    auto t = detail::trim(piece);
    if (!t.empty()) labels.emplace_back(t);
  }
  return CategoryPath(std::move(labels));
}

CategoryPath CategoryPath::prefix(size_t n) const {
  n = std::min(n, labels_.size());
  CategoryPath p;
  p.labels_.assign(labels_.begin(), labels_.begin() + static_cast<std::ptrdiff_t>(n));
  return p;
}

bool CategoryPath::is_ancestor_of(const CategoryPath& other) const {
  return labels_.size() < other.labels_.size() && common_prefix_length(other) == labels_.size();
}

size_t CategoryPath::common_prefix_length(const CategoryPath& other) const {
  size_t n = std::min(labels_.size(), other.labels_.size());
  size_t i = 0;
  while (i < n && labels_[i] == other.labels_[i]) ++i;
  return i;
}

std::string CategoryPath::str() const { return detail::join(labels_, "/"); }

const std::set<std::string>& default_retained_top_levels() {
  static const std::set<std::string> s{"Arts",   "Business",   "Computers", "Games",    "Health",
                                       "Home",   "News",       "Recreation", "Reference", "Science",
                                       "Shopping", "Society", "Sports"};
  return s;
}

const std::set<std::string>& default_excluded_top_levels() {
  static const std::set<std::string> s{"World", "Regional", "Netscape", "Kids_and_Teens", "Adult"};
  return s;
}

CategoryIndex CategoryIndex::from_entries(std::vector<OntologyEntry> entries, size_t* duplicates) {
  CategoryIndex index;
  size_t dups = 0;
  index.entries_.reserve(entries.size());
  for (auto& e : entries) {
    if (e.category.empty()) throw ParseError("category", "entry without category: " + e.uri);
    if (index.by_surt_.count(e.surt)) {
      ++dups;
      continue;
    }
    size_t pos = index.entries_.size();
    index.by_surt_.emplace(e.surt, pos);
    index.by_category_[e.category.str()].push_back(pos);
    index.entries_.push_back(std::move(e));
  }
  if (duplicates) *duplicates = dups;
  return index;
}

std::vector<const OntologyEntry*> CategoryIndex::in_category(const CategoryPath& path) const {
  std::vector<const OntologyEntry*> out;
  auto it = by_category_.find(path.str());
  if (it == by_category_.end()) return out;
  for (size_t i : it->second) out.push_back(&entries_[i]);
  return out;
}

std::vector<const OntologyEntry*> CategoryIndex::under(const CategoryPath& path) const {
  std::vector<const OntologyEntry*> out;
  std::string key = path.str();
  for (auto it = by_category_.lower_bound(key); it != by_category_.end(); ++it) {
    if (!it->first.starts_with(key)) break;
    if (it->first.size() > key.size() && it->first[key.size()] != '/') continue;
    for (size_t i : it->second) out.push_back(&entries_[i]);
  }
  return out;
}

const OntologyEntry* CategoryIndex::find_surt(std::string_view surt) const {
  auto it = by_surt_.find(std::string(surt));
  return it == by_surt_.end() ? nullptr : &entries_[it->second];
}

std::vector<CategoryPath> CategoryIndex::categories() const {
  std::vector<CategoryPath> out;
  out.reserve(by_category_.size());
  for (const auto& [key, _] : by_category_) out.push_back(CategoryPath::parse(key));
  return out;
}

void CategoryIndex::save(const std::filesystem::path& tsv) const {
  std::ofstream out(tsv, std::ios::binary);
  std::ofstream side(tsv.string() + ".surt", std::ios::binary);
  if (!out || !side) throw IoError("cannot write index " + tsv.string());
  out << "# category\turi\ttitle\tdescription\n";
  for (const auto& e : entries_) {
    out << e.category.str() << '\t' << e.uri << '\t' << clean_field(e.title.value_or("")) << '\t'
        << clean_field(e.description.value_or("")) << '\n';
    side << e.surt << '\n';
  }
  if (!out || !side) throw IoError("write failed for index " + tsv.string());
}

CategoryIndex CategoryIndex::load(const std::filesystem::path& tsv) {
  std::ifstream in(tsv, std::ios::binary);
  if (!in) throw IoError("cannot open index " + tsv.string());
  std::ifstream side(tsv.string() + ".surt", std::ios::binary);
  bool have_side = static_cast<bool>(side);

  std::vector<OntologyEntry> entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto f = detail::split_keep(line, '\t');
    if (f.size() != 4) throw IoError(tsv.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
    OntologyEntry e;
    e.category = CategoryPath::parse(f[0]);
    e.uri = std::string(f[1]);
    e.title = non_empty(f[2]);
    e.description = non_empty(f[3]);
    std::string surt;
    if (have_side && std::getline(side, surt) && !surt.empty()) {
      e.surt = std::move(surt);
    } else {
      e.surt = canonicalize_surt(e.uri);
    }
    entries.push_back(std::move(e));
  }
  return from_entries(std::move(entries));
}

DmozFormat parse_dmoz_format(std::string_view name) {
  std::string n = detail::to_lower(detail::trim(name));
  if (n == "rdf") return DmozFormat::Rdf;
  if (n == "tsv") return DmozFormat::Tsv;
  throw ConfigError("unknown ontology format '" + std::string(name) + "' (expected rdf or tsv)");
}

CategoryIndex ingest_dmoz(std::istream& source, DmozFormat format, const IngestOptions& options,
                          IngestReport* report) {
  IngestReport local;
  IngestReport& r = report ? *report : local;
  r = IngestReport{};
  Ingestor ingestor(options, r);
  if (format == DmozFormat::Rdf) {
    ingest_rdf(source, ingestor);
  } else {
    ingest_tsv(source, ingestor);
  }
  return ingestor.finish();
}

std::shared_ptr<FixtureOntologyProvider> FixtureOntologyProvider::parse(std::istream& in) {
  auto p = std::make_shared<FixtureOntologyProvider>();
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      SecondaryHit hit;
      std::string official = j.at("official_uri").get<std::string>();
      hit.page = j.value("page", official);
      hit.categories = j.at("categories").get<std::vector<std::string>>();
      hit.members = j.value("members", std::vector<std::string>{});
      p->records_.emplace(canonicalize_surt(normalize_input_uri(official)), std::move(hit));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("secondary fixture line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw IoError("secondary fixture line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return p;
}

std::shared_ptr<FixtureOntologyProvider> FixtureOntologyProvider::load(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw IoError("cannot open secondary fixture " + jsonl.string());
  return parse(in);
}

std::optional<SecondaryHit> FixtureOntologyProvider::find_official(std::string_view uri) const {
  auto it = records_.find(canonicalize_surt(uri));
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(LookupSource s) {
  return s == LookupSource::PrimaryIndex ? "primary" : "secondary";
}

LookupOutcome lookup_requested(const CategoryIndex& index, const OntologyProvider* secondary,
                               std::string_view uri, LookupCounters* counters) {
  LookupOutcome out;
  std::string surt = canonicalize_surt(uri);
  if (const OntologyEntry* e = index.find_surt(surt)) {
    LookupHit hit;
    hit.source = LookupSource::PrimaryIndex;
    hit.categories.push_back(e->category);
    for (const OntologyEntry* s : index.in_category(e->category)) hit.entries.push_back(*s);
    out.hit = std::move(hit);
    if (counters) ++counters->primary_hits;
    return out;
  }
  if (secondary) {
    try {
      if (auto found = secondary->find_official(uri)) {
        LookupHit hit;
        hit.source = LookupSource::SecondaryProvider;
        for (const auto& c : found->categories) {
          std::string label = sanitize_label(c);
          if (!label.empty()) hit.categories.emplace_back(std::vector<std::string>{label});
        }
        CategoryPath filed = hit.categories.empty() ? CategoryPath({"Secondary"}) : hit.categories.front();
        for (const auto& m : found->members) {
          try {
            OntologyEntry entry;
            entry.uri = parse_uri(normalize_input_uri(m)).to_string();
            entry.surt = canonicalize_surt(entry.uri);
            entry.category = filed;
            hit.entries.push_back(std::move(entry));
          } catch (const ParseError&) {
            // unparseable member URIs are not recommendable
          }
        }
        out.hit = std::move(hit);
        if (counters) ++counters->secondary_hits;
        return out;
      }
    } catch (const std::exception& e) {
      out.degraded = true;
      out.warning = "secondary ontology '" + secondary->name() + "' failed: " + e.what();
      if (counters) ++counters->provider_failures;
    }
  }
  if (counters) ++counters->misses;
  return out;
}

}  // namespace lostpage
