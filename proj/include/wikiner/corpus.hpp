// Copyright 2026 The Wikiner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WIKINER_CORPUS_HPP
#define WIKINER_CORPUS_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <wikiner/common.hpp>
#include <wikiner/unicode.hpp>

namespace wikiner
{

// Declaration order is the deterministic tie order used across the library.
enum class MainCategory : std::uint8_t { persName, orgName, geogName, placeName, date, time };

inline constexpr std::array<MainCategory, 6> kMainCategories = {
    MainCategory::persName,  MainCategory::orgName, MainCategory::geogName,
    MainCategory::placeName, MainCategory::date,    MainCategory::time};

enum class SubCategory : std::uint8_t { forename, surname, addName, bloc, country, region, settlement, district };

inline constexpr std::string_view to_string(MainCategory c)
{
    constexpr std::array<std::string_view, 6> names = {"persName", "orgName", "geogName",
                                                       "placeName", "date", "time"};
    return names[static_cast<std::size_t>(c)];
}

inline constexpr std::string_view to_string(SubCategory c)
{
    constexpr std::array<std::string_view, 8> names = {"forename", "surname", "addName", "bloc",
                                                       "country", "region", "settlement", "district"};
    return names[static_cast<std::size_t>(c)];
}

inline std::optional<MainCategory> parse_main_category(std::string_view s)
{
    for (auto c : kMainCategories) {
        if (to_string(c) == s) {
            return c;
        }
    }
    return std::nullopt;
}

inline std::optional<SubCategory> parse_sub_category(std::string_view s)
{
    for (std::uint8_t i = 0; i < 8; ++i) {
        auto c = static_cast<SubCategory>(i);
        if (to_string(c) == s) {
            return c;
        }
    }
    return std::nullopt;
}

inline constexpr bool sub_allowed(MainCategory main, SubCategory sub)
{
    switch (main) {
    case MainCategory::persName:
        return sub == SubCategory::forename || sub == SubCategory::surname || sub == SubCategory::addName;
    case MainCategory::placeName:
        return sub == SubCategory::bloc || sub == SubCategory::country || sub == SubCategory::region
               || sub == SubCategory::settlement || sub == SubCategory::district;
    default:
        return false;
    }
}

struct EntityCategory {
    MainCategory main = MainCategory::persName;
    std::optional<SubCategory> sub;
    bool derived = false;

    friend auto operator<=>(const EntityCategory &, const EntityCategory &) = default;
};

// Text form: `main`, `main_sub`, optionally suffixed with `@derived`,
// e.g. `persName_forename`, `placeName_settlement@derived`.
inline std::string to_string(const EntityCategory &c)
{
    std::string out(to_string(c.main));
    if (c.sub) {
        out += '_';
        out += to_string(*c.sub);
    }
    if (c.derived) {
        out += "@derived";
    }
    return out;
}

inline EntityCategory parse_category(std::string_view s)
{
    EntityCategory out;
    if (auto at = s.find('@'); at != std::string_view::npos) {
        if (s.substr(at + 1) != "derived") {
            throw Error("unknown category flag in '" + std::string(s) + "'");
        }
        out.derived = true;
        s = s.substr(0, at);
    }
    std::string_view main_part = s;
    std::optional<std::string_view> sub_part;
    if (auto us = s.find('_'); us != std::string_view::npos) {
        main_part = s.substr(0, us);
        sub_part = s.substr(us + 1);
    }
    auto main = parse_main_category(main_part);
    if (!main) {
        throw Error("unknown entity category '" + std::string(s) + "'");
    }
    out.main = *main;
    if (sub_part) {
        auto sub = parse_sub_category(*sub_part);
        if (!sub || !sub_allowed(*main, *sub)) {
            throw Error("invalid subcategory in '" + std::string(s) + "'");
        }
        out.sub = sub;
    }
    if (out.derived && out.main != MainCategory::placeName) {
        throw Error("only placeName entities can be derived: '" + std::string(s) + "'");
    }
    return out;
}

struct Token {
    std::string surface;
    std::optional<std::string> lemma;
    std::size_t index = 0;

    // Lowercased base form, falling back to the lowercased surface.
    [[nodiscard]] std::string key() const { return unicode::to_lower(lemma ? *lemma : surface); }

    friend bool operator==(const Token &, const Token &) = default;
};

enum class Layer : std::uint8_t { main, sub };

struct EntitySpan {
    std::size_t start = 0;
    std::size_t end = 0; // exclusive
    EntityCategory category;
    Layer layer = Layer::main;
    // Shared by the pieces of one discontinuous entity; empty otherwise.
    std::optional<std::string> fragment;

    [[nodiscard]] std::size_t length() const { return end - start; }

    [[nodiscard]] bool overlaps(const EntitySpan &o) const { return start < o.end && o.start < end; }

    [[nodiscard]] bool contains(const EntitySpan &o) const { return start <= o.start && o.end <= end; }

    friend bool operator==(const EntitySpan &, const EntitySpan &) = default;
};

inline bool canonical_less(const EntitySpan &a, const EntitySpan &b)
{
    return std::tie(a.layer, a.start, a.end, a.category, a.fragment)
           < std::tie(b.layer, b.start, b.end, b.category, b.fragment);
}

struct Sentence {
    std::vector<Token> tokens;
    std::vector<EntitySpan> spans;

    [[nodiscard]] std::vector<EntitySpan> layer(Layer l) const
    {
        std::vector<EntitySpan> out;
        for (const auto &s : spans) {
            if (s.layer == l) {
                out.push_back(s);
            }
        }
        return out;
    }

    void sort_spans() { std::sort(spans.begin(), spans.end(), canonical_less); }

    friend bool operator==(const Sentence &, const Sentence &) = default;
};

struct Document {
    std::string id;
    std::vector<Sentence> sentences;

    friend bool operator==(const Document &, const Document &) = default;
};

inline Sentence make_sentence(const std::vector<std::string> &surfaces)
{
    Sentence s;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        s.tokens.push_back(Token{surfaces[i], std::nullopt, i});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Tag schemes

enum class TagScheme : std::uint8_t { BIO, BIOES };

using TagSequence = std::vector<std::string>;

inline constexpr std::string_view kOutside = "O";

struct ParsedTag {
    char prefix = 'O'; // O, B, I, E or S
    std::string label;
};

inline ParsedTag parse_tag(std::string_view tag)
{
    if (tag == kOutside) {
        return {};
    }
    if (tag.size() < 3 || tag[1] != '-' || std::string_view("BIES").find(tag[0]) == std::string_view::npos) {
        throw Error("malformed tag '" + std::string(tag) + "'");
    }
    return ParsedTag{tag[0], std::string(tag.substr(2))};
}

inline std::vector<std::string> tag_vocabulary(const std::vector<std::string> &labels, TagScheme scheme)
{
    std::vector<std::string> out{std::string(kOutside)};
    for (const auto &l : labels) {
        out.push_back("B-" + l);
        out.push_back("I-" + l);
        if (scheme == TagScheme::BIOES) {
            out.push_back("E-" + l);
            out.push_back("S-" + l);
        }
    }
    return out;
}

inline TagSequence bio_encode(std::vector<EntitySpan> spans, std::size_t length, TagScheme scheme = TagScheme::BIO)
{
    std::sort(spans.begin(), spans.end(), [](const auto &a, const auto &b) { return a.start < b.start; });
    TagSequence tags(length, std::string(kOutside));
    std::size_t last_end = 0;
    for (const auto &s : spans) {
        check(s.start < s.end && s.end <= length, "span out of range");
        check(s.start >= last_end, "overlapping spans cannot be tag-encoded");
        last_end = s.end;
        auto label = to_string(s.category);
        for (std::size_t i = s.start; i < s.end; ++i) {
            char prefix = i == s.start ? 'B' : 'I';
            if (scheme == TagScheme::BIOES) {
                if (s.length() == 1) {
                    prefix = 'S';
                } else if (i + 1 == s.end) {
                    prefix = 'E';
                }
            }
            tags[i] = std::string(1, prefix) + "-" + label;
        }
    }
    return tags;
}

// Labeled ranges before category parsing; used for arbitrary tag sets.
struct TagSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string label;

    friend bool operator==(const TagSpan &, const TagSpan &) = default;
};

// Strict mode rejects ill-formed sequences. Repair mode reads an I (or E)
// with no open entity of the same label as a B (or S), and closes dangling
// BIOES entities at the point where they stop.
inline std::vector<TagSpan> decode_tag_spans(const TagSequence &tags, TagScheme scheme = TagScheme::BIO,
                                             bool strict = true)
{
    std::vector<TagSpan> out;
    std::optional<TagSpan> open;
    auto close = [&](std::size_t end) {
        if (open) {
            open->end = end;
            out.push_back(*open);
            open.reset();
        }
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        auto t = parse_tag(tags[i]);
        if (scheme == TagScheme::BIO && (t.prefix == 'E' || t.prefix == 'S')) {
            throw FormatError("BIOES tag '" + tags[i] + "' in BIO sequence", 0);
        }
        bool continues = open && open->label == t.label;
        if (scheme == TagScheme::BIOES && open && (t.prefix == 'O' || t.prefix == 'B' || t.prefix == 'S' || !continues)) {
            if (strict) {
                throw FormatError("entity '" + open->label + "' not closed before position " + std::to_string(i), 0);
            }
            close(i);
            continues = false;
        }
        switch (t.prefix) {
        case 'O':
            close(i);
            break;
        case 'B':
            close(i);
            open = TagSpan{i, i, t.label};
            break;
        case 'S':
            close(i);
            out.push_back(TagSpan{i, i + 1, t.label});
            break;
        case 'I':
        case 'E':
            if (!continues) {
                if (strict) {
                    throw FormatError("tag '" + tags[i] + "' at position " + std::to_string(i)
                                          + " does not continue an open entity",
                                      0);
                }
                close(i);
                if (t.prefix == 'E') {
                    out.push_back(TagSpan{i, i + 1, t.label});
                    break;
                }
                open = TagSpan{i, i, t.label};
            } else if (t.prefix == 'E') {
                close(i + 1);
            }
            break;
        default:
            break;
        }
    }
    if (open && scheme == TagScheme::BIOES && strict) {
        throw FormatError("entity '" + open->label + "' not closed at end of sequence", 0);
    }
    close(tags.size());
    return out;
}

inline std::vector<EntitySpan> bio_decode(const TagSequence &tags, TagScheme scheme = TagScheme::BIO,
                                          bool strict = true, Layer layer = Layer::main)
{
    std::vector<EntitySpan> out;
    for (auto &ts : decode_tag_spans(tags, scheme, strict)) {
        out.push_back(EntitySpan{ts.start, ts.end, parse_category(ts.label), layer, std::nullopt});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Column format:
//   surface TAB lemma TAB main-tag TAB sub-tag [TAB entity-id]
// `_` marks a missing lemma or entity id; a blank line ends a sentence and a
// `#doc <id>` line starts a new document.

inline std::vector<Document> parse_corpus(std::istream &in)
{
    std::vector<Document> docs;
    Sentence current;
    TagSequence main_tags, sub_tags;
    std::vector<std::optional<std::string>> ids;
    std::vector<std::size_t> line_numbers;

    auto current_doc = [&]() -> Document & {
        if (docs.empty()) {
            docs.push_back(Document{"doc0", {}});
        }
        return docs.back();
    };
    auto flush = [&] {
        if (current.tokens.empty()) {
            return;
        }
        auto decode_layer = [&](const TagSequence &tags, Layer layer) {
            for (std::size_t i = 0; i < tags.size(); ++i) {
                try {
                    auto t = parse_tag(tags[i]);
                    if (t.prefix != 'O') {
                        parse_category(t.label);
                    }
                } catch (const Error &e) {
                    throw FormatError(e.what(), line_numbers[i]);
                }
            }
            try {
                return bio_decode(tags, TagScheme::BIO, true, layer);
            } catch (const FormatError &e) {
                // Re-run on growing prefixes to report the offending line.
                for (std::size_t i = 1; i <= tags.size(); ++i) {
                    try {
                        bio_decode(TagSequence(tags.begin(), tags.begin() + static_cast<std::ptrdiff_t>(i)),
                                   TagScheme::BIO, true, layer);
                    } catch (const Error &inner) {
                        throw FormatError(inner.what(), line_numbers[i - 1]);
                    }
                }
                throw FormatError(e.what(), line_numbers.back());
            }
        };
        auto main_spans = decode_layer(main_tags, Layer::main);
        for (auto &s : main_spans) {
            s.fragment = ids[s.start];
        }
        auto sub_spans = decode_layer(sub_tags, Layer::sub);
        current.spans = std::move(main_spans);
        current.spans.insert(current.spans.end(), sub_spans.begin(), sub_spans.end());
        current.sort_spans();
        current_doc().sentences.push_back(std::move(current));
        current = Sentence{};
        main_tags.clear();
        sub_tags.clear();
        ids.clear();
        line_numbers.clear();
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            flush();
            continue;
        }
        if (line.rfind("#doc", 0) == 0) {
            flush();
            docs.push_back(Document{std::string(trim(std::string_view(line).substr(4))), {}});
            continue;
        }
        if (line[0] == '#' && line.find('\t') == std::string::npos) {
            continue;
        }
        auto cols = split(line, '\t');
        if (cols.size() < 4 || cols.size() > 5) {
            throw FormatError("expected 4 or 5 tab-separated columns, got " + std::to_string(cols.size()), line_no);
        }
        if (cols[0].empty()) {
            throw FormatError("empty token surface", line_no);
        }
        Token tok{cols[0], cols[1] == "_" ? std::nullopt : std::optional<std::string>(cols[1]),
                  current.tokens.size()};
        current.tokens.push_back(std::move(tok));
        main_tags.push_back(cols[2]);
        sub_tags.push_back(cols[3]);
        ids.push_back(cols.size() == 5 && cols[4] != "_" ? std::optional<std::string>(cols[4]) : std::nullopt);
        line_numbers.push_back(line_no);
    }
    flush();
    return docs;
}

inline std::vector<Document> parse_corpus(const std::string &text)
{
    std::istringstream in(text);
    return parse_corpus(in);
}

// Emits the format read by parse_corpus. The entity-id column is written only
// for documents that carry fragment ids.
inline void write_corpus(std::ostream &out, const std::vector<Document> &docs)
{
    for (const auto &doc : docs) {
        out << "#doc " << doc.id << '\n';
        bool with_ids = false;
        for (const auto &s : doc.sentences) {
            for (const auto &sp : s.spans) {
                with_ids = with_ids || sp.fragment.has_value();
            }
        }
        for (const auto &s : doc.sentences) {
            auto n = s.tokens.size();
            auto main_tags = bio_encode(s.layer(Layer::main), n);
            auto sub_tags = bio_encode(s.layer(Layer::sub), n);
            std::vector<std::string> ids(n, "_");
            for (const auto &sp : s.layer(Layer::main)) {
                if (sp.fragment) {
                    for (auto i = sp.start; i < sp.end; ++i) {
                        ids[i] = *sp.fragment;
                    }
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                const auto &t = s.tokens[i];
                out << t.surface << '\t' << (t.lemma ? *t.lemma : "_") << '\t' << main_tags[i] << '\t' << sub_tags[i];
                if (with_ids) {
                    out << '\t' << ids[i];
                }
                out << '\n';
            }
            out << '\n';
        }
    }
}

inline std::string write_corpus(const std::vector<Document> &docs)
{
    std::ostringstream out;
    write_corpus(out, docs);
    return out.str();
}

// ---------------------------------------------------------------------------
// Span transformations

// Pieces of one fragmented entity separated by exactly one token (or
// adjacent) become a single span covering the gap; wider gaps turn the pieces
// into independent entities. Only same-category pieces are merged.
inline Sentence normalize_fragmented(Sentence s)
{
    std::vector<EntitySpan> kept;
    std::map<std::string, std::vector<EntitySpan>> groups;
    for (auto &sp : s.spans) {
        if (sp.layer == Layer::main && sp.fragment) {
            groups[*sp.fragment].push_back(sp);
        } else {
            kept.push_back(sp);
        }
    }
    for (auto &[id, pieces] : groups) {
        std::sort(pieces.begin(), pieces.end(), [](const auto &a, const auto &b) { return a.start < b.start; });
        std::optional<EntitySpan> acc;
        for (auto piece : pieces) {
            piece.fragment.reset();
            if (acc && acc->category == piece.category && piece.start >= acc->end && piece.start - acc->end <= 1) {
                acc->end = piece.end;
                continue;
            }
            if (acc) {
                kept.push_back(*acc);
            }
            acc = piece;
        }
        if (acc) {
            kept.push_back(*acc);
        }
    }
    s.spans = std::move(kept);
    s.sort_spans();
    return s;
}

inline Document normalize_fragmented(Document doc)
{
    for (auto &s : doc.sentences) {
        s = normalize_fragmented(std::move(s));
    }
    return doc;
}

namespace detail
{

// Longest first, then leftmost, then category order.
inline bool overlap_priority(const EntitySpan &a, const EntitySpan &b)
{
    return std::make_tuple(b.length(), a.start, a.category) < std::make_tuple(a.length(), b.start, b.category);
}

} // namespace detail

// Keeps the longest span of every overlap group in the main layer and moves
// the others to the sub layer. Sub-layer spans that still collide there are
// resolved with the same priority and the losers are dropped.
inline Sentence relocate_overlaps(Sentence s, std::size_t *dropped = nullptr)
{
    auto main = s.layer(Layer::main);
    auto sub = s.layer(Layer::sub);
    std::stable_sort(main.begin(), main.end(), detail::overlap_priority);
    std::vector<EntitySpan> kept_main;
    for (auto &sp : main) {
        bool clash = std::any_of(kept_main.begin(), kept_main.end(), [&](const auto &k) { return k.overlaps(sp); });
        if (clash) {
            sp.layer = Layer::sub;
            sp.fragment.reset();
            sub.push_back(sp);
        } else {
            kept_main.push_back(sp);
        }
    }
    std::stable_sort(sub.begin(), sub.end(), detail::overlap_priority);
    std::vector<EntitySpan> kept_sub;
    for (auto &sp : sub) {
        bool clash = std::any_of(kept_sub.begin(), kept_sub.end(), [&](const auto &k) { return k.overlaps(sp); });
        if (clash) {
            if (dropped != nullptr) {
                ++*dropped;
            }
        } else {
            kept_sub.push_back(sp);
        }
    }
    s.spans = std::move(kept_main);
    s.spans.insert(s.spans.end(), kept_sub.begin(), kept_sub.end());
    s.sort_spans();
    return s;
}

inline Document relocate_overlaps(Document doc, std::size_t *dropped = nullptr)
{
    for (auto &s : doc.sentences) {
        s = relocate_overlaps(std::move(s), dropped);
    }
    return doc;
}

enum class DerivedKind : std::uint8_t { inhabitant, adjective };

struct DerivedEntry {
    std::string place;
    DerivedKind kind = DerivedKind::inhabitant;
};

// Lexicon of inhabitant names and relational adjectives, keyed by the
// lowercased word form. File format: `form TAB lemma-of-place TAB kind`.
class DerivedLexicon
{
public:
    DerivedLexicon() = default;

    void add(std::string_view form, std::string place, DerivedKind kind)
    {
        entries_.emplace(unicode::to_lower(form), DerivedEntry{std::move(place), kind});
    }

    [[nodiscard]] const DerivedEntry *find(std::string_view key) const
    {
        auto it = entries_.find(unicode::to_lower(key));
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t size() const { return entries_.size(); }

    static DerivedLexicon load(std::istream &in)
    {
        DerivedLexicon lex;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty() || line[0] == '#') {
                continue;
            }
            auto cols = split(trim(line), '\t');
            if (cols.size() != 3) {
                throw FormatError("derived lexicon needs 3 columns", line_no);
            }
            DerivedKind kind;
            if (cols[2] == "inhabitant") {
                kind = DerivedKind::inhabitant;
            } else if (cols[2] == "adjective") {
                kind = DerivedKind::adjective;
            } else {
                throw FormatError("unknown derived kind '" + cols[2] + "'", line_no);
            }
            lex.add(cols[0], cols[1], kind);
        }
        return lex;
    }

private:
    std::unordered_map<std::string, DerivedEntry> entries_;
};

// Flags placeName spans whose single token is a derived form, and adds a
// derived placeName for uncovered tokens found in the lexicon.
inline Sentence mark_derived(Sentence s, const DerivedLexicon &lexicon)
{
    std::vector<bool> covered(s.tokens.size(), false);
    for (auto &sp : s.spans) {
        if (sp.layer != Layer::main) {
            continue;
        }
        for (auto i = sp.start; i < sp.end; ++i) {
            covered[i] = true;
        }
        if (sp.category.main == MainCategory::placeName && sp.length() == 1
            && lexicon.find(s.tokens[sp.start].key()) != nullptr) {
            sp.category.derived = true;
        }
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (!covered[i] && lexicon.find(s.tokens[i].key()) != nullptr) {
            EntityCategory cat{MainCategory::placeName, std::nullopt, true};
            s.spans.push_back(EntitySpan{i, i + 1, cat, Layer::main, std::nullopt});
        }
    }
    s.sort_spans();
    return s;
}

inline Document mark_derived(Document doc, const DerivedLexicon &lexicon)
{
    for (auto &s : doc.sentences) {
        s = mark_derived(std::move(s), lexicon);
    }
    return doc;
}

} // namespace wikiner

#endif
