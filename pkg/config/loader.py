"""
Configuration loader base class for the traffic shaper

Base class from which all configuration sections should inherit. A section
is filled from a node of the configuration tree by load_xml, validated by
check, and then frozen. If you are adding a new section, this code shows
the minimum required methods to be implemented: all methods decorated with
"abstractmethod" must be overridden in the class that inherits from
ConfigLoader.

Two file syntaxes produce the same tree:

    # flat dotted keys
    macro.d_m_m = 1000
    qos.sigma_dbm_per_mhz = -105

    <shaper><macro><d_m_m>1000</d_m_m></macro></shaper>

For example usage, go look at the implementation in network.py and energy.py.
"""

## built-in modules
import copy
import logging
import math
import re
import xml.etree.ElementTree as ET
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict

## local imports
from shapererrors import ConfigError

ROOT_TAG = "shaper"


class ConfigLoader(ABC):
    """
    Class for all configuration sections that load from a config tree node

    Subclasses declare FIELDS, mapping the tag of each child node onto the
    attribute it sets. Every attribute listed in FIELDS must be set before
    check() is called unless it appears in DEFAULTS.
    """
    expected_root = ""
    FIELDS: Dict[str, str] = {}
    DEFAULTS: Dict[str, float] = {}

    def __init__(self, node: ET.Element = None, **values):
        """
        Args:
            node : optional node so that a second call to load_xml does not
                have to be made
            values : attribute values given directly, e.g. in tests. the
                section is checked and frozen when any are given.
        """
        object.__setattr__(self, "_frozen", False)
        self.logger = logging.getLogger(repr(self))
        for attr in self.FIELDS.values():
            setattr(self, attr, self.DEFAULTS.get(attr))
        if node is not None:
            self.load_xml(node)
        if values:
            for attr, value in values.items():
                if attr not in self.FIELDS.values():
                    raise TypeError(f"{self} has no field '{attr}'")
                setattr(self, attr, value)
            self.check()
            self.freeze()

    def load_xml(self, node: ET.Element):
        """
        Initialize the section attributes from a node of the config tree

        Args:
            'node': type is ET.Element. tag should match self.expected_root
        """
        assert node.tag == self.expected_root, "expected node" + \
            f" <{self.expected_root}> but received <{node.tag}>"

        set_by = {}
        for child in node:
            try:
                attr = self.FIELDS[child.tag]
            except KeyError:
                self.logger.warning(f"Unrecognized config key "
                                    f"'{self.key(child.tag)}', ignoring it")
                continue
            # aliases of one attribute are mutually exclusive
            if attr in set_by:
                raise ConfigError(self, self.key(child.tag),
                                  message=f"'{self.key(child.tag)}' and "
                                          f"'{self.key(set_by[attr])}' both set {attr}; "
                                          f"give only one",
                                  node=child, line=node_line(child))
            set_by[attr] = child.tag
            try:
                setattr(self, attr, self.parse_value(child.tag, child.text))
            except ValueError as e:
                raise ConfigError(self, self.key(child.tag),
                                  message=f"{e}\n'{child.text}' is not a valid value "
                                          f"for key '{self.key(child.tag)}'",
                                  node=child, line=node_line(child))

    def parse_value(self, tag: str, text: str) -> float:
        """
        Convert the text of a node to the attribute value. Overwrite in
        sections whose keys accept units or non-float values.
        """
        return ConfigLoader.str_to_float(text)

    @abstractmethod
    def check(self):
        """
        Enforce the section's invariants, raising ConfigError naming the key
        """
        self.require(*self.FIELDS.values())

    def require(self, *attrs: str):
        """
        Raise ConfigError for the first of attrs that was never set
        """
        for attr in attrs:
            if getattr(self, attr, None) is None:
                raise ConfigError(self, self.key_of(attr),
                                  message=f"missing required key '{self.key_of(attr)}'")

    def invariant(self, ok: bool, attr: str, condition: str):
        """
        Raise ConfigError naming the key of attr if ok is False
        """
        if not ok:
            raise ConfigError(self, self.key_of(attr),
                              message=f"{self.key_of(attr)} = {getattr(self, attr)!r} "
                                      f"violates {condition}")

    def freeze(self):
        object.__setattr__(self, "_frozen", True)

    def with_(self, **changes) -> "ConfigLoader":
        """
        Return a checked, frozen copy of this section with some attributes
        replaced
        """
        clone = copy.copy(self)
        object.__setattr__(clone, "_frozen", False)
        for attr, value in changes.items():
            if attr not in self.FIELDS.values():
                raise TypeError(f"{self} has no field '{attr}'")
            setattr(clone, attr, value)
        clone.check()
        clone.freeze()
        return clone

    def key(self, tag: str) -> str:
        return f"{self.expected_root}.{tag}"

    def key_of(self, attr: str) -> str:
        for tag, name in self.FIELDS.items():
            if name == attr:
                return self.key(tag)
        return self.key(attr)

    def as_dict(self) -> Dict[str, float]:
        return {attr: getattr(self, attr) for attr in self.FIELDS.values()}

    def __setattr__(self, name, value):
        if self._frozen:
            raise AttributeError(f"{self} is frozen; use with_() to derive a changed copy")
        object.__setattr__(self, name, value)

    def __eq__(self, other):
        return type(self) is type(other) and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((type(self).__name__, tuple(self.as_dict().items())))

    @staticmethod
    def str_to_float(num_str: str) -> float:
        """
        Converts a string to a finite float.

        Args:
            num_str : string such as '10e6' or ' 0.05 '
        Returns:
            float value encoded in num_str
        Throws:
            ValueError if the string is empty, non-numeric, nan or infinite
        """
        if num_str is None or not num_str.strip():
            raise ValueError("empty value")
        value = float(num_str)
        if not math.isfinite(value):
            raise ValueError(f"{num_str} is not finite")
        return value

    def __repr__(self):
        """
        Overwrite in other sections if more detailed info is desired
        """
        return self.__class__.__name__


def node_line(node: ET.Element):
    """
    Source line recorded on a node by parse_flat, or None
    """
    line = node.get("line")
    return None if line is None else int(line)


def parse_flat(text: str) -> ET.Element:
    """
    Build a config tree from flat dotted-key text

    Each non-blank line not starting with '#' must read 'section.key = value'.
    A trailing '# comment' is dropped. The line number is stored on each leaf
    node as the attribute 'line' for diagnostics.

    Args:
        text: the file contents
    Returns:
        root element tagged ROOT_TAG
    Throws:
        ConfigError naming the line for malformed lines or duplicate keys
    """
    root = ET.Element(ROOT_TAG)
    seen = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = re.fullmatch(r"([A-Za-z_]\w*(?:\.[A-Za-z_]\w*)+)\s*[=:]\s*(.*)", line)
        if match is None:
            raise ConfigError("config file", line, line=number,
                              message=f"expected 'section.key = value' but read '{raw.strip()}'")
        key, value = match.groups()
        if key in seen:
            raise ConfigError("config file", key, line=number,
                              message=f"key '{key}' already set on line {seen[key]}")
        seen[key] = number

        parent = root
        *sections, leaf = key.split(".")
        for section in sections:
            found = parent.find(section)
            parent = found if found is not None else ET.SubElement(parent, section)
        node = ET.SubElement(parent, leaf, line=str(number))
        node.text = value.strip()
    return root


def read_tree(path) -> ET.Element:
    """
    Read a config file in either syntax and return its root element

    Files whose first non-blank character is '<' are parsed as XML.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("config file", str(path), message=f"cannot read {path}: {e}")

    if text.lstrip().startswith("<"):
        try:
            root = ET.fromstring(text)
        except ET.ParseError as e:
            line = e.position[0] if e.position else None
            raise ConfigError("config file", str(path), line=line,
                              message=f"XML parse error in {path}: {e}")
        if root.tag != ROOT_TAG:
            raise ConfigError("config file", root.tag,
                              message=f"root tag must be <{ROOT_TAG}>, found <{root.tag}>")
        return root
    return parse_flat(text)
