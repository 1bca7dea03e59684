"""Published table labels, kept apart from the library that computes them."""

# (measurability, localisation) per row of the main table, in order
TABLE_MAIN = (
    ("Yes", "non-localised"),
    ("Yes", "t1/t2-localised"),
    ("Yes", "x_A-localised"),
    ("No", "non-localised"),
    ("No", "non-localised"),
    ("Yes", "tau_*-localised"),
    ("Yes", "localised"),
)

# (class, scenario column) -> lab text in that cell
TABLE_APPENDIX = {
    ("Fine", "QS_CT"): "Alice's Lab with (x,t)",
    ("Fine", "QS_QT"): "Claire's Lab with (x,t)",
    ("Unresolved", "QS_G"): "Claire_G's Lab with (x,t)",
    ("Effective", "QS_CT"): "Alice's Lab with t_arr",
    ("Effective", "QS_QT"): "Alice's Lab using (x,t), a",
    ("Effective", "QS_G"): "Alice's Lab using a",
    ("Coarse", "QS_CT"): "Any Lab with triv. reference",
    ("Coarse", "QS_QT"): "Alice's Lab using tau",
    ("Coarse", "QS_G"): "Alice's Lab using tau",
}

# class -> (non-trivial reference, acts on vacuum, relatively measurable)
CLASS_PROPERTIES = {
    "Fine": (True, True, True),
    "Effective": (True, False, False),
    "Coarse": (False, False, True),
}

DOUBLE_SLIT = {"Claire": "Yes", "Quinn": "No"}
