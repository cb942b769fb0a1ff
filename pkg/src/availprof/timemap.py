"""Ordered map from integer time to a payload, with O(1) neighbor hops.

The map is a red-black tree whose nodes are additionally threaded into a
doubly-linked list in key order.  The tree gives O(log n) floor lookup
(greatest key <= t); the list gives O(1) successor/predecessor from any
node handle, which is what the profile's window walks rely on.

Handles are the nodes themselves.  Rotations rearrange tree links only,
so a handle stays valid until that exact key is removed; using it after
removal raises InvalidHandleError.  Deletion splices the in-order
successor node into the removed node's place (it never copies payloads
between nodes), so handles to surviving keys are never disturbed.

Keys are 64-bit signed integers interpreted as seconds.  Single-writer:
no internal synchronization.
"""

from __future__ import annotations

import math
from typing import Any, Iterator, Optional

from .errors import DuplicateKeyError, InvalidHandleError, NotFoundError

RED = 0
BLACK = 1


class Node:
    """Tree node and list link in one; exposed as an opaque handle."""

    __slots__ = ("key", "payload", "color", "parent", "left", "right",
                 "prev", "next", "removed")

    def __init__(self, key: int, payload: Any) -> None:
        self.key = key
        self.payload = payload
        self.color = RED
        self.parent: "Node" = None  # type: ignore[assignment]
        self.left: "Node" = None  # type: ignore[assignment]
        self.right: "Node" = None  # type: ignore[assignment]
        self.prev: Optional["Node"] = None
        self.next: Optional["Node"] = None
        self.removed = False

    def __repr__(self) -> str:
        color = "R" if self.color == RED else "B"
        return f"<Node {self.key}:{color}>"


class TimeMap:
    """Red-black tree threaded with a doubly-linked list in key order."""

    __slots__ = ("nil", "root", "head", "tail", "_size")

    def __init__(self) -> None:
        self.nil = Node(0, None)
        self.nil.color = BLACK
        self.nil.parent = self.nil.left = self.nil.right = self.nil
        self.root = self.nil
        self.head: Optional[Node] = None
        self.tail: Optional[Node] = None
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self._size > 0

    # -- rotations (tree links only; the threaded list is untouched) --

    def _left_rotate(self, x: Node) -> None:
        y = x.right
        x.right = y.left
        if y.left is not self.nil:
            y.left.parent = x
        y.parent = x.parent
        if x.parent is self.nil:
            self.root = y
        elif x is x.parent.left:
            x.parent.left = y
        else:
            x.parent.right = y
        y.left = x
        x.parent = y

    def _right_rotate(self, x: Node) -> None:
        y = x.left
        x.left = y.right
        if y.right is not self.nil:
            y.right.parent = x
        y.parent = x.parent
        if x.parent is self.nil:
            self.root = y
        elif x is x.parent.right:
            x.parent.right = y
        else:
            x.parent.left = y
        y.right = x
        x.parent = y

    # -- insertion -----------------------------------------------------

    def insert(self, key: int, payload: Any) -> Node:
        """Insert a new key; returns its handle.

        The in-order neighbors are discovered during the descent (last
        right-turn is the predecessor, last left-turn the successor), so
        the list splice costs nothing extra.
        """
        parent = self.nil
        node = self.root
        pred: Optional[Node] = None
        succ: Optional[Node] = None
        while node is not self.nil:
            parent = node
            if key == node.key:
                raise DuplicateKeyError(f"key {key} already present")
            if key < node.key:
                succ = node
                node = node.left
            else:
                pred = node
                node = node.right
        z = Node(key, payload)
        z.left = z.right = self.nil
        z.parent = parent
        if parent is self.nil:
            self.root = z
        elif key < parent.key:
            parent.left = z
        else:
            parent.right = z

        z.prev = pred
        z.next = succ
        if pred is not None:
            pred.next = z
        else:
            self.head = z
        if succ is not None:
            succ.prev = z
        else:
            self.tail = z

        self._size += 1
        self._insert_fixup(z)
        return z

    def _insert_fixup(self, z: Node) -> None:
        while z.parent.color == RED:
            if z.parent is z.parent.parent.left:
                y = z.parent.parent.right
                if y.color == RED:
                    z.parent.color = BLACK
                    y.color = BLACK
                    z.parent.parent.color = RED
                    z = z.parent.parent
                else:
                    if z is z.parent.right:
                        z = z.parent
                        self._left_rotate(z)
                    z.parent.color = BLACK
                    z.parent.parent.color = RED
                    self._right_rotate(z.parent.parent)
            else:
                y = z.parent.parent.left
                if y.color == RED:
                    z.parent.color = BLACK
                    y.color = BLACK
                    z.parent.parent.color = RED
                    z = z.parent.parent
                else:
                    if z is z.parent.left:
                        z = z.parent
                        self._right_rotate(z)
                    z.parent.color = BLACK
                    z.parent.parent.color = RED
                    self._left_rotate(z.parent.parent)
        self.root.color = BLACK

    # -- lookup ----------------------------------------------------------

    def find(self, key: int) -> Optional[Node]:
        node = self.root
        while node is not self.nil:
            if key == node.key:
                return node
            node = node.left if key < node.key else node.right
        return None

    def floor(self, key: int) -> Optional[Node]:
        """Handle of the greatest key <= the argument, or None."""
        best: Optional[Node] = None
        node = self.root
        while node is not self.nil:
            if node.key == key:
                return node
            if node.key < key:
                best = node
                node = node.right
            else:
                node = node.left
        return best

    def first(self) -> Optional[Node]:
        return self.head

    def last(self) -> Optional[Node]:
        return self.tail

    def next(self, h: Node) -> Optional[Node]:
        """In-order successor via the list link; None at the maximum."""
        if h.removed:
            raise InvalidHandleError(f"handle for key {h.key} was removed")
        return h.next

    def prev(self, h: Node) -> Optional[Node]:
        if h.removed:
            raise InvalidHandleError(f"handle for key {h.key} was removed")
        return h.prev

    def __contains__(self, key: int) -> bool:
        return self.find(key) is not None

    def __iter__(self) -> Iterator[int]:
        node = self.head
        while node is not None:
            yield node.key
            node = node.next

    def items(self) -> Iterator[tuple[int, Any]]:
        node = self.head
        while node is not None:
            yield node.key, node.payload
            node = node.next

    def nodes(self) -> Iterator[Node]:
        node = self.head
        while node is not None:
            yield node
            node = node.next

    # -- deletion ----------------------------------------------------

    def remove(self, key: int) -> Any:
        """Remove a key, returning its payload."""
        z = self.find(key)
        if z is None:
            raise NotFoundError(f"key {key} not in map")

        # list splice first: rotations during rebalancing cannot change
        # the in-order sequence, so the chain is already correct
        if z.prev is not None:
            z.prev.next = z.next
        else:
            self.head = z.next
        if z.next is not None:
            z.next.prev = z.prev
        else:
            self.tail = z.prev

        y = z
        y_color = y.color
        if z.left is self.nil:
            x = z.right
            self._transplant(z, z.right)
        elif z.right is self.nil:
            x = z.left
            self._transplant(z, z.left)
        else:
            # two children: splice the successor node itself into z's
            # place so every surviving handle keeps its own node
            y = z.right
            while y.left is not self.nil:
                y = y.left
            y_color = y.color
            x = y.right
            if y.parent is z:
                x.parent = y
            else:
                self._transplant(y, y.right)
                y.right = z.right
                y.right.parent = y
            self._transplant(z, y)
            y.left = z.left
            y.left.parent = y
            y.color = z.color
        if y_color == BLACK:
            self._delete_fixup(x)

        z.removed = True
        z.prev = z.next = None
        z.parent = z.left = z.right = self.nil
        self._size -= 1
        return z.payload

    def _transplant(self, u: Node, v: Node) -> None:
        if u.parent is self.nil:
            self.root = v
        elif u is u.parent.left:
            u.parent.left = v
        else:
            u.parent.right = v
        v.parent = u.parent

    def _delete_fixup(self, x: Node) -> None:
        while x is not self.root and x.color == BLACK:
            if x is x.parent.left:
                w = x.parent.right
                if w.color == RED:
                    w.color = BLACK
                    x.parent.color = RED
                    self._left_rotate(x.parent)
                    w = x.parent.right
                if w.left.color == BLACK and w.right.color == BLACK:
                    w.color = RED
                    x = x.parent
                else:
                    if w.right.color == BLACK:
                        w.left.color = BLACK
                        w.color = RED
                        self._right_rotate(w)
                        w = x.parent.right
                    w.color = x.parent.color
                    x.parent.color = BLACK
                    w.right.color = BLACK
                    self._left_rotate(x.parent)
                    x = self.root
            else:
                w = x.parent.left
                if w.color == RED:
                    w.color = BLACK
                    x.parent.color = RED
                    self._right_rotate(x.parent)
                    w = x.parent.left
                if w.right.color == BLACK and w.left.color == BLACK:
                    w.color = RED
                    x = x.parent
                else:
                    if w.left.color == BLACK:
                        w.right.color = BLACK
                        w.color = RED
                        self._left_rotate(w)
                        w = x.parent.left
                    w.color = x.parent.color
                    x.parent.color = BLACK
                    w.left.color = BLACK
                    self._right_rotate(x.parent)
                    x = self.root
        x.color = BLACK

    # -- diagnostics ---------------------------------------------------

    def validate(self) -> dict:
        """Check every structural invariant; raises AssertionError.

        Verified: BST order, root/nil blackness, no red node with a red
        child, equal black count on every root-to-nil path, the list
        chain matching a recursive in-order walk, mutually consistent
        prev/next links, and height <= 2*log2(n+1).  Returns basic stats
        for the caller to assert on.
        """
        if self.nil.color != BLACK:
            raise AssertionError("nil sentinel is not black")
        if self.root.color != BLACK:
            raise AssertionError("root is not black")

        inorder: list[Node] = []

        def walk(node: Node, lo, hi) -> tuple[int, int]:
            # returns (black-height, height)
            if node is self.nil:
                return 1, 0
            if lo is not None and node.key <= lo:
                raise AssertionError(f"BST order broken at {node.key}")
            if hi is not None and node.key >= hi:
                raise AssertionError(f"BST order broken at {node.key}")
            if node.color == RED:
                if node.left.color == RED or node.right.color == RED:
                    raise AssertionError(f"red-red violation at {node.key}")
            lbh, lh = walk(node.left, lo, node.key)
            inorder.append(node)
            rbh, rh = walk(node.right, node.key, hi)
            if lbh != rbh:
                raise AssertionError(f"black-height mismatch at {node.key}")
            return lbh + (1 if node.color == BLACK else 0), 1 + max(lh, rh)

        black_height, height = walk(self.root, None, None)

        if len(inorder) != self._size:
            raise AssertionError("size counter out of sync")
        chain = list(self.nodes())
        if [n.key for n in chain] != [n.key for n in inorder]:
            raise AssertionError("list order differs from in-order walk")
        for i, node in enumerate(chain):
            if node is not inorder[i]:
                raise AssertionError("list and tree disagree on node identity")
            expect_prev = chain[i - 1] if i > 0 else None
            if node.prev is not expect_prev:
                raise AssertionError(f"prev link wrong at {node.key}")
        if self.head is not (chain[0] if chain else None):
            raise AssertionError("head pointer wrong")
        if self.tail is not (chain[-1] if chain else None):
            raise AssertionError("tail pointer wrong")
        limit = 2 * math.log2(self._size + 1)
        if height > limit:
            raise AssertionError(f"height {height} exceeds 2*log2(n+1)")
        return {"size": self._size, "height": height,
                "black_height": black_height}

    def to_dot(self) -> str:
        """Graphviz dump for eyeballing; solid tree edges, dashed list."""
        lines = ["digraph timemap {", "  node [shape=circle];"]
        for node in self.nodes():
            color = "red" if node.color == RED else "black"
            lines.append(
                f'  n{node.key} [label="{node.key}:{color[0].upper()}" '
                f'color={color}];')
        for node in self.nodes():
            for child in (node.left, node.right):
                if child is not self.nil:
                    lines.append(f"  n{node.key} -> n{child.key};")
            if node.next is not None:
                lines.append(
                    f"  n{node.key} -> n{node.next.key} [style=dashed];")
        lines.append("}")
        return "\n".join(lines)
