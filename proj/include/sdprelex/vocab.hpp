#ifndef SDPRELEX_VOCAB_HPP
#define SDPRELEX_VOCAB_HPP

#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdprelex/io_util.hpp"

namespace sdprelex {

// Insertion-ordered string-to-id map. Ids are dense and stable, so vocabulary
// construction order is part of a model's determinism contract.
class Vocabulary {
public:
    Vocabulary() = default;

    int add(const std::string& item) {
        auto it = index_.find(item);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(items_.size());
        items_.push_back(item);
        index_.emplace(item, id);
        return id;
    }

    // -1 when absent.
    int lookup(const std::string& item) const {
        auto it = index_.find(item);
        return it == index_.end() ? -1 : it->second;
    }

    int lookup_or(const std::string& item, int fallback) const {
        int id = lookup(item);
        return id < 0 ? fallback : id;
    }

    bool contains(const std::string& item) const { return index_.count(item) > 0; }
    const std::string& at(int id) const { return items_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(items_.size()); }
    const std::vector<std::string>& items() const { return items_; }

    void save(std::ostream& out) const {
        io::write_u64(out, items_.size());
        for (const auto& s : items_) io::write_string(out, s);
    }

    static Vocabulary load(std::istream& in) {
        Vocabulary v;
        std::uint64_t n = io::read_u64(in);
        for (std::uint64_t i = 0; i < n; ++i) v.add(io::read_string(in));
        return v;
    }

private:
    std::vector<std::string> items_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace sdprelex

#endif
