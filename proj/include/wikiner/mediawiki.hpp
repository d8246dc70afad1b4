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

#ifndef WIKINER_MEDIAWIKI_HPP
#define WIKINER_MEDIAWIKI_HPP

#include <istream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <wikiner/common.hpp>
#include <wikiner/unicode.hpp>
#include <wikiner/wikigraph.hpp>

// Converts MediaWiki XML export dumps into page records. Only links and
// category memberships are extracted; templates are dropped, not expanded.

namespace wikiner::mediawiki
{

inline std::string unescape_xml(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        auto semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back('&');
            continue;
        }
        auto ent = s.substr(i + 1, semi - i - 1);
        if (ent == "lt") {
            out.push_back('<');
        } else if (ent == "gt") {
            out.push_back('>');
        } else if (ent == "amp") {
            out.push_back('&');
        } else if (ent == "quot") {
            out.push_back('"');
        } else if (ent == "apos") {
            out.push_back('\'');
        } else if (!ent.empty() && ent[0] == '#') {
            try {
                auto cp = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                              ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                              : std::stoul(std::string(ent.substr(1)));
                unicode::append(out, static_cast<char32_t>(cp));
            } catch (const std::logic_error &) {
                out.append(s.substr(i, semi - i + 1));
            }
        } else {
            out.append(s.substr(i, semi - i + 1));
        }
        i = semi;
    }
    return out;
}

// MediaWiki titles: underscores are spaces and the first letter is upper case.
inline std::string normalize_title(std::string_view raw)
{
    std::string t(trim(raw));
    for (auto &c : t) {
        if (c == '_') {
            c = ' ';
        }
    }
    auto cps = unicode::decode(t);
    if (!cps.empty() && unicode::is_lower(cps[0])) {
        auto loc = unicode::detail::utf8_locale();
        if (loc != static_cast<locale_t>(nullptr)) {
            cps[0] = static_cast<char32_t>(towupper_l(static_cast<wint_t>(cps[0]), loc));
        } else if (cps[0] >= 'a' && cps[0] <= 'z') {
            cps[0] -= 32;
        }
    }
    return unicode::encode(cps);
}

struct ParsedWikitext {
    std::vector<PageLink> links;
    std::vector<std::string> categories;
    std::string text;
};

inline bool is_category_namespace(std::string_view prefix)
{
    auto p = unicode::to_lower(prefix);
    return p == "category" || p == "kategoria";
}

// Link-extraction only: `[[Target|anchor]]`, `[[Target]]` and
// `[[Category:Name|sort]]`. Other namespaced links (files, interwiki) are
// skipped. Plain text keeps everything outside links and templates.
inline ParsedWikitext parse_wikitext(std::string_view src)
{
    ParsedWikitext out;
    std::size_t i = 0;
    int template_depth = 0;
    while (i < src.size()) {
        if (src.compare(i, 2, "{{") == 0) {
            ++template_depth;
            i += 2;
            continue;
        }
        if (template_depth > 0) {
            if (src.compare(i, 2, "}}") == 0) {
                --template_depth;
                i += 2;
            } else {
                ++i;
            }
            continue;
        }
        if (src.compare(i, 2, "[[") == 0) {
            auto close = src.find("]]", i + 2);
            if (close == std::string_view::npos) {
                break;
            }
            auto inner = src.substr(i + 2, close - i - 2);
            i = close + 2;
            out.text.push_back(' ');
            std::string_view target = inner, anchor;
            bool has_anchor = false;
            if (auto bar = inner.find('|'); bar != std::string_view::npos) {
                target = inner.substr(0, bar);
                anchor = inner.substr(bar + 1);
                has_anchor = true;
            }
            bool leading_colon = !target.empty() && target.front() == ':';
            if (leading_colon) {
                target.remove_prefix(1);
            }
            if (auto colon = target.find(':'); colon != std::string_view::npos) {
                auto ns = trim(target.substr(0, colon));
                if (is_category_namespace(ns) && !leading_colon) {
                    out.categories.push_back(normalize_title(target.substr(colon + 1)));
                }
                continue;
            }
            if (auto hash = target.find('#'); hash != std::string_view::npos) {
                target = target.substr(0, hash);
            }
            if (trim(target).empty()) {
                continue;
            }
            PageLink link;
            link.target = normalize_title(target);
            link.anchor = std::string(trim(has_anchor && !trim(anchor).empty() ? anchor : target));
            out.links.push_back(std::move(link));
            continue;
        }
        if (src.compare(i, 2, "''") == 0) {
            i += 2;
            continue;
        }
        out.text.push_back(src[i]);
        ++i;
    }
    return out;
}

namespace detail
{

inline std::optional<std::string> element_text(std::string_view page, std::string_view tag)
{
    auto open = page.find("<" + std::string(tag));
    if (open == std::string_view::npos) {
        return std::nullopt;
    }
    auto gt = page.find('>', open);
    if (gt == std::string_view::npos) {
        return std::nullopt;
    }
    if (page[gt - 1] == '/') {
        return std::string();
    }
    auto close = page.find("</" + std::string(tag) + ">", gt);
    if (close == std::string_view::npos) {
        return std::nullopt;
    }
    return unescape_xml(page.substr(gt + 1, close - gt - 1));
}

inline std::optional<std::string> redirect_title(std::string_view page)
{
    auto at = page.find("<redirect");
    if (at == std::string_view::npos) {
        return std::nullopt;
    }
    auto q = page.find("title=\"", at);
    if (q == std::string_view::npos) {
        return std::nullopt;
    }
    auto end = page.find('"', q + 7);
    return normalize_title(unescape_xml(page.substr(q + 7, end - q - 7)));
}

} // namespace detail

inline PageRecord parse_page(std::string_view page)
{
    PageRecord r;
    auto title = detail::element_text(page, "title");
    auto id = detail::element_text(page, "id");
    if (!title || !id) {
        throw Error("page without title or id");
    }
    r.title = normalize_title(*title);
    r.id = std::stoll(*id);
    r.ns = std::stoi(detail::element_text(page, "ns").value_or("0"));
    if (r.ns == kCategoryNamespace) {
        r.title = strip_category_prefix(r.title);
    }
    r.redirect = detail::redirect_title(page);
    auto parsed = parse_wikitext(detail::element_text(page, "text").value_or(""));
    r.categories = std::move(parsed.categories);
    if (!r.redirect) {
        r.links = std::move(parsed.links);
        r.text = std::move(parsed.text);
    }
    return r;
}

// Reads `<page>` elements one at a time.
inline std::vector<PageRecord> read_xml(std::istream &in)
{
    std::vector<PageRecord> out;
    std::string buffer;
    std::string chunk(1 << 16, '\0');
    while (true) {
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        auto got = static_cast<std::size_t>(in.gcount());
        buffer.append(chunk.data(), got);
        std::size_t consumed = 0;
        while (true) {
            auto open = buffer.find("<page>", consumed);
            if (open == std::string::npos) {
                break;
            }
            auto close = buffer.find("</page>", open);
            if (close == std::string::npos) {
                consumed = open;
                break;
            }
            auto page = std::string_view(buffer).substr(open, close + 7 - open);
            auto ns = detail::element_text(page, "ns").value_or("0");
            if (ns == "0" || ns == "14") {
                out.push_back(parse_page(page));
            }
            consumed = close + 7;
        }
        if (consumed > 0) {
            buffer.erase(0, consumed);
        } else if (buffer.find("<page>") == std::string::npos && buffer.size() > 16) {
            // Keep a tail in case a tag straddles the chunk boundary.
            buffer.erase(0, buffer.size() - 16);
        }
        if (got == 0) {
            break;
        }
    }
    return out;
}

} // namespace wikiner::mediawiki

#endif
