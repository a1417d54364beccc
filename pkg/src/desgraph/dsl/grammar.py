GRAMMAR = r"""
start: _NL? design_line _block*

design_line: "design" STRING _NL

_block: units_block
      | trts_block
      | rcrds_block
      | expect_block
      | allot_block
      | assign_block
      | output_block

units_block: "units" ":" _body{factor}
trts_block: "trts" ":" _body{factor}
rcrds_block: "rcrds" ":" _body{record}
expect_block: "expect" ":" _body{expectation}
allot_block: "allot" ":" _body{allotment}
assign_block: "assign" ":" _body{_assign_item}
output_block: "output" ":" _body{_output_item}

// items of a block: on the header line, on their own lines, or both
_line{item}: item ("," item)* _NL
_body{item}: (_line{item} | _NL) _line{item}*

// level specifications
factor: NAME "=" _spec
_spec: count | values | seq | single | nested | crossed | conditioned

count: NUMBER
values: "[" (_value ("," _value)*)? "]"
_value: STRING | NUMBER
seq: NUMBER ":" NUMBER
single: "lvls" "(" values ")"
nested: "nested_in" "(" NAME "," (count | values | seq | crossed | rule ("," rule)*) ")"
crossed: "crossed_by" "(" NAME ("," NAME)+ ")"
conditioned: "conditioned_on" "(" NAME ("," rule)+ ")"
rule: (STRING ("," STRING)* | WILDCARD) "~" (count | values | seq)

record: NAME "of" NAME

expectation: NAME COMPARATOR NUMBER   -> compare
           | NAME "in" values         -> member

allotment: NAME (":" NAME)* "~" NAME

_assign_item: order | unit_order | seed | constrain
order: "order" "=" _orders
unit_order: "unit_order" "=" _orders
_orders: ORDER_NAME | "[" ORDER_NAME ("," ORDER_NAME)* "]"
seed: "seed" "=" NUMBER
constrain: "constrain" ":" NAME "=" _names

_output_item: label_nested
label_nested: "label_nested" "=" _names
            | "label_nested" "=" "all"   -> label_nested_all

_names: NAME | "[" NAME ("," NAME)* "]"

STRING: /"(\\.|[^"\\\n])*"/
NAME: /[A-Za-z_][A-Za-z0-9_]*/
ORDER_NAME: /[A-Za-z][A-Za-z0-9_\-]*/
NUMBER: /-?\d+(\.\d+)?([eE][+-]?\d+)?/
COMPARATOR: "<=" | ">=" | "<" | ">"
WILDCARD: "."
COMMENT: /#[^\n]*/
_NL: /(\r?\n[\t ]*(#[^\n]*)?)+/

%import common.WS_INLINE
%ignore WS_INLINE
%ignore COMMENT
"""
