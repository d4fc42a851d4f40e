#include "knotfield/behavior_tree.hpp"

#include "knotfield/error.hpp"

namespace knotfield {

std::string_view to_string(Status s) {
    switch (s) {
    case Status::Running: return "running";
    case Status::Success: return "success";
    case Status::Failure: return "failure";
    }
    return "unknown";
}

Composite::Composite(std::string name, std::vector<NodePtr> children)
    : Node(std::move(name)), children_(std::move(children)) {
    if (children_.empty()) throw Error(ErrorKind::Structural, "composite '" + this->name() + "' has no children");
    for (const auto& c : children_) {
        if (!c) throw Error(ErrorKind::Structural, "composite '" + this->name() + "' has a null child");
    }
}

Status Sequence::tick() {
    for (std::size_t i = 0; i < children_.size(); ++i) {
        const Status s = children_[i]->tick();
        if (s == Status::Success) continue;
        for (std::size_t j = i + 1; j < children_.size(); ++j) children_[j]->reset();
        if (s == Status::Failure) children_[i]->reset();
        return s;
    }
    reset();
    return Status::Success;
}

void Sequence::reset() {
    for (auto& c : children_) c->reset();
}

Status SequenceStar::tick() {
    while (current_ < children_.size()) {
        const Status s = children_[current_]->tick();
        if (s == Status::Running) return s;
        if (s == Status::Failure) {
            reset();
            return s;
        }
        ++current_;
    }
    reset();
    return Status::Success;
}

void SequenceStar::reset() {
    current_ = 0;
    for (auto& c : children_) c->reset();
}

Status SelectorStar::tick() {
    while (current_ < children_.size()) {
        const Status s = children_[current_]->tick();
        if (s == Status::Running) return s;
        if (s == Status::Success) {
            reset();
            return s;
        }
        ++current_;
    }
    reset();
    return Status::Failure;
}

void SelectorStar::reset() {
    current_ = 0;
    for (auto& c : children_) c->reset();
}

Leaf::Leaf(std::string name, TickFn tick, ResetFn reset)
    : Node(std::move(name)), tick_(std::move(tick)), reset_(std::move(reset)) {
    if (!tick_) throw Error(ErrorKind::Structural, "leaf '" + this->name() + "' has no tick function");
}

} // namespace knotfield
