#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace knotfield {

enum class Status { Running, Success, Failure };

std::string_view to_string(Status s);

class Node {
public:
    explicit Node(std::string name) : name_(std::move(name)) {}
    virtual ~Node() = default;
    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    virtual Status tick() = 0;
    // Drops any progress; the next tick starts over.
    virtual void reset() {}

    const std::string& name() const { return name_; }

private:
    std::string name_;
};

using NodePtr = std::unique_ptr<Node>;

class Composite : public Node {
public:
    Composite(std::string name, std::vector<NodePtr> children);
    std::span<const NodePtr> children() const { return children_; }

protected:
    std::vector<NodePtr> children_;
};

// Ticks every child from the first on each tick. A Running child halts the
// children after it, so earlier conditions keep being enforced.
class Sequence : public Composite {
public:
    using Composite::Composite;
    Status tick() override;
    void reset() override;
};

// Sequence with memory: children that already succeeded are not re-ticked
// until the node is reset or finishes.
class SequenceStar : public Composite {
public:
    using Composite::Composite;
    Status tick() override;
    void reset() override;

private:
    std::size_t current_ = 0;
};

// Selector with memory: resumes the Running child and only moves to the next
// alternative when the current one fails.
class SelectorStar : public Composite {
public:
    using Composite::Composite;
    Status tick() override;
    void reset() override;

private:
    std::size_t current_ = 0;
};

class Leaf : public Node {
public:
    using TickFn = std::function<Status()>;
    using ResetFn = std::function<void()>;

    Leaf(std::string name, TickFn tick, ResetFn reset = {});
    Status tick() override { return tick_(); }
    void reset() override {
        if (reset_) reset_();
    }

private:
    TickFn tick_;
    ResetFn reset_;
};

} // namespace knotfield
