#include "mcrg/textrep.hpp"

#include "mcrg/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace mcrg {

namespace {

bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

void split_word(std::string_view w, std::vector<std::string>& out) {
    std::size_t start = 0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        const bool lower_to_upper = !is_upper(w[i - 1]) && is_upper(w[i]);
        const bool acronym_end = is_upper(w[i - 1]) && is_upper(w[i]) && i + 1 < w.size() && is_lower(w[i + 1]);
        if (lower_to_upper || acronym_end) {
            out.emplace_back(w.substr(start, i - start));
            start = i;
        }
    }
    out.emplace_back(w.substr(start));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_alnum(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_alnum(text[j])) ++j;
        split_word(text.substr(i, j - i), out);
        i = j;
    }
    for (auto& t : out) {
        std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    return out;
}

Vocabulary::Vocabulary() : tokens{"<pad>", "<unk>"}, index{{"<pad>", kPad}, {"<unk>", kUnk}}, df{0, 0} {}

int Vocabulary::id(const std::string& token) const {
    auto it = index.find(token);
    if (it == index.end() || it->second < 2) return kUnk;
    return it->second;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& toks) const {
    std::vector<int> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(id(t));
    return out;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, int min_df, int max_size) {
    if (min_df < 1) throw InvalidArgument(fmt::format("min_df must be >= 1, got {}", min_df));
    if (max_size < 2) throw InvalidArgument(fmt::format("max_size must leave room for PAD and UNK, got {}", max_size));
    std::map<std::string, int> counts;
    for (const auto& doc : docs) {
        for (const auto& t : std::set<std::string>(doc.begin(), doc.end())) ++counts[t];
    }
    std::vector<std::pair<std::string, int>> kept;
    for (const auto& [t, c] : counts) {
        if (c >= min_df) kept.emplace_back(t, c);
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (kept.size() > static_cast<std::size_t>(max_size - 2)) kept.resize(static_cast<std::size_t>(max_size - 2));

    Vocabulary v;
    v.n_docs = static_cast<int>(docs.size());
    for (const auto& [t, c] : kept) {
        v.index.emplace(t, v.size());
        v.tokens.push_back(t);
        v.df.push_back(c);
    }
    return v;
}

TfIdfVector tfidf(const std::vector<std::string>& doc, const Vocabulary& vocab) {
    std::map<int, int> tf;
    for (const auto& t : doc) {
        int id = vocab.id(t);
        if (id >= 2) ++tf[id];
    }
    TfIdfVector out;
    for (const auto& [id, count] : tf) {
        out[id] = count * std::log(static_cast<double>(vocab.n_docs) / vocab.df[id]);
    }
    return out;
}

EmbeddingTable EmbeddingTable::init(int vocab_size, int dim, std::mt19937_64& rng) {
    if (vocab_size < 2 || dim < 1) throw InvalidArgument(fmt::format("embedding table {}x{}", vocab_size, dim));
    std::normal_distribution<double> normal(0.0, 0.1);
    nn::Matrix m(vocab_size, dim);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    m.row(Vocabulary::kPad).setZero();
    return EmbeddingTable{nn::Tensor::parameter(std::move(m))};
}

nn::Tensor embed_comment(const std::vector<int>& ids, const EmbeddingTable& table) {
    return embed_comments({ids}, table);
}

nn::Tensor embed_comments(const std::vector<std::vector<int>>& ids, const EmbeddingTable& table) {
    return nn::segment_mean(table.weights, ids);
}

nlohmann::json to_json(const Vocabulary& vocab) {
    return {{"tokens", std::vector<std::string>(vocab.tokens.begin() + 2, vocab.tokens.end())},
            {"df", std::vector<int>(vocab.df.begin() + 2, vocab.df.end())},
            {"n_docs", vocab.n_docs}};
}

Vocabulary vocabulary_from_json(const nlohmann::json& j) {
    Vocabulary v;
    std::vector<std::string> tokens;
    std::vector<int> df;
    try {
        tokens = j.at("tokens").get<std::vector<std::string>>();
        df = j.at("df").get<std::vector<int>>();
        v.n_docs = j.at("n_docs").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("vocabulary", "<document>", e.what());
    }
    if (tokens.size() != df.size()) throw SchemaError("vocabulary", "df", "length differs from tokens");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (df[i] < 1 || df[i] > v.n_docs) {
            throw SchemaError("vocabulary", "df", fmt::format("df of '{}' is {} with {} documents", tokens[i], df[i], v.n_docs));
        }
        if (!v.index.emplace(tokens[i], v.size()).second) {
            throw SchemaError("vocabulary", "tokens", fmt::format("duplicate token '{}'", tokens[i]));
        }
        v.tokens.push_back(tokens[i]);
        v.df.push_back(df[i]);
    }
    return v;
}

}  // namespace mcrg
