"""Prompt templates for the discovery agents.

The wording of each prompt is fixed; only the named placeholders (e.g.
`{before_code}`) vary per request. `render` substitutes known
placeholders and leaves every other brace untouched, so the literal JSON
examples inside the prompts survive rendering. Changing a prompt is
configuration, not code.
"""

from __future__ import annotations

import re

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


def render(template: str, **values: str) -> str:
    def sub(match: re.Match) -> str:
        name = match.group(1)
        if name in values:
            return str(values[name])
        return match.group(0)

    return _PLACEHOLDER_RE.sub(sub, template)


CANDIDATE_GEN = """\
You are an automatic rewriter for Python code that uses the pandas and numpy
libraries. You need to help to rewrite the user's code to be more performant
while being semantically equivalent. Rewrite only the code that involves numpy,
pandas, or native Python. Do not forget anything that hampers the correctness of
your rewritten code.

You must respond in JSON format with two fields:
1. reasoning: A brief explanation of your optimization strategy and why the rewrite is faster
2. rewritten_snippet: The optimized code snippet, or False if you can't find a faster equivalent
version

Do not make imports in the rewritten code. The rewritten code should be directly usable.
Try to retain the variables names in the original code to make our equivalence checking easier.

Code to optimize:
{before_code}
{feedback}"""


FEEDBACK_GEN = """\
You are an adversarial code analysis verifier.
Your goal is to find counterexamples where optimization code would be INCORRECT.

Before:
{before_code}
After:
{after_code}

Your task is to FIND COUNTEREXAMPLES where:
1. The before code would execute correctly
2. The optimized after code would produce DIFFERENT or INCORRECT results

Think adversarially about CORRECTNESS:
- What edge cases could break the transformation?
- What data types, shapes, or values would cause semantic differences?
- What pandas/numpy behaviors differ between the two approaches?
- Are there cases where the transformation changes behavior
(ordering, indexing, dtypes, NaN handling, etc.)?

For each counterexample, provide:
1. A concrete description of the scenario
2. Why the LHS would work but RHS would fail or give different results
3. What change would prevent this counterexample

However, if the incorrect cases can just be handled by setting an appropriate
precondition (small runtime), then consider the before and after case as equivalent.

Only produce output if at least one counterexample issue is found.
Return your analysis in JSON format:
{
    explanation: Your adversarial analysis explaining your search for counterexamples,
    is_valid: true if NO counterexamples found, false otherwise,
    counterexamples: [
        {
            description: Description of the scenario,
            why_lhs_works: Why the LHS would work but RHS would fail or give different results,
            what_change_would_prevent_this_counterexample: What change would prevent this
            counterexample
        },
        ...
    ] (empty list [] if none found)
}"""


GENERALIZER = """\
You are an expert pandas code analyzer specializing in identifying variables that can be
generalized in code transformation rules.

You are given two pandas code snippets. The before is the normal code and after is the optimized
code. The overall goal is to find a generalized rule. The first step to do this is to find the
variables that can be generalized in the rule.

Before:
{before_code}
After:
{after_code}
{feedback}

Guidelines
1. Extract Concrete Expressions Only: Your answer must only contain the exact, literal substrings
from the code. For example: df['A'], NA, or ['col1', 'col2'], x.
2. Do Not Invent Placeholders: Do not invent abstract names like `dataframe_expression` or
`values_to_replace`. If you cannot point to the exact substring in the code, do not include it.
3. Capture Entire Expressions: Do not break down list expressions. If the code uses ['col_x',
'col_y'], you must include the entire ['col_x', 'col_y'] string, not 'col_x' and 'col_y' separately.
4. Make sure to not include the formal arguments in your answer. It should only contain the
actual arguments.
5. Normalize duplicates: Remove duplicates that differ only by quote style (`'col'` vs `col`).
If a literal appears in both Before and After, keep it once.
6. Ignore method names, or transformations such as `.head()`, `.apply()`, or `.drop()`.
7. If a variable is mentioned in the after code but not in the before code, do not include it in
your answer."""


GENERALIZER_CHECKER = """\
You are a code analysis verifier. Review the following analysis:

Original Code Transformation:
Before: {before_code}
After: {after_code}

Agent's Analysis:
Variables for generalization: {variables}
Explanation: {explanation}

Verification Steps

Part 1: Individual Variable Assessment
For each variable in the Variables for generalization list, verify the following:
1.  Existence: The variable exists as a literal substring in the 'before' and/or 'after' code.
2.  Concreteness: The variable is a concrete code expression (e.g., df['A'], NA, y) and not
an abstract placeholder name (e.g., 'columns_expression', 'dataframe_name').
3.  Relevance: The variable is a relevant data expression or literal value, not an unrelated
part of the code.
4.  Check if the variable is mentioned in the after code but not in the before code. If it is,
provide feedback to remove it from the list.

Part 2: Overall List Assessment
After checking each variable, evaluate the list as a whole:
4.  Completeness: Does the list capture all the expressions or literal values required
for generalization? Is anything missing?

Return your verification in JSON format:
{
    is_valid: true/false,
    feedback: Final summary; if invalid, the main reason.
}"""


TYPE_RESOLVER = """\
You are an expert pandas code analyzer specializing in identifying variable types that can
be generalized in code transformation rules.

You are given two pandas code snippets. The before is the normal code and after is the
optimized code. The overall goal is to find a generalized rule. We have already figured out
the variables in the snippet that can be generalized, your task to find out the python AST
node type. Please make sure that the type is as general as possible. There are the types that
are allowed:
@{Name: x} => A Name denotes a Python identifier. It represents a variable, function, class,
or module name that can appear in the code. Example: df, ser, item.
@{expr: e} => An expr denotes any valid Python expression, as defined by the Python grammar.
It can be a variable, a literal, a function call, an attribute access, or a more complex expression.
Example: df['col'], pandas.Series(a, ser.index).
@{Const(str): s} => A Const(str) denotes a string literal constant. Example: 'col', ':', 'a'.
@{Const(int): s} => A Const(int) denotes an int literal constant. Example: 1, 2, 99.
@{Const(float): s} => A Const(float) denotes a float literal constant. Example: 2.3, 3.5.

Before:
{before_code}
After:
{after_code}
Variables for generalization: {variables}
{feedback}

Make sure to not include the formal arguments in your answer. It should only contain the
actual arguments."""


TYPE_RESOLVER_CHECKER = """\
You are a code analysis verifier. Review the following analysis:

Original Code Transformation:
Before: {before_code}
After: {after_code}

Variables for generalization: {variables}

Agent's Analysis:
AST node types: {ast_node_types}
Explanation: {explanation}

Verify if the identified AST node types are correct for generalization. Consider:
1. Are these the correct AST node types for the given variables that can be generalized?
2. Are the types as general as possible (Name, expr, Const(str), Const(int), Const(float))?
3. Do the AST node types match the variables provided (same count and order)?

Return your verification in JSON format:
{
    explanation: Detailed explanation of your verification reasoning,
    is_valid: true/false,
    feedback: Specific feedback on what's correct or incorrect
}"""


RULE_CONSTRUCTOR = """\
You are an expert pandas code analyzer specializing in generating generalized transformation
rules from code transformations, the variables in the snippet that can be generalized and the
python AST node types of these variables.

You are given two pandas code snippets. The before is the normal code and after is the
optimized code. The overall goal is to find a generalized rule. We have already figured out
the variables in the snippet that can be generalized and the python AST node types of these variables
Your job is to rewrite the LHS and RHS to a more generalized form. While renaming, make sure
to use fresh variables and include their corresponding AST node types in LHS using the format:
@{AST node type: fresh variable}. For the RHS, you use the same variables as the rewritten LHS.
Here is the format: @{fresh variable}. Additionally, if a variable is mentioned more than once
in the LHS, you will need to follow the format: @{AST node type: fresh variable}, each time
it appears. You do not have the authority to change the variables and their python AST node
types. Do not invent new generalized variables and their python AST node types.

Before:
{before_code}
After:
{after_code}
Variables and AST node types:
{variables_text}
{feedback}"""


RULE_CONSTRUCTOR_CHECKER = """\
You are a code analysis verifier. Review the following analysis:

Original Code Transformation:
Before: {before_code}
After: {after_code}

Variables for generalization and their AST node types:
{variables_text}

Agent's Analysis:
Rewritten LHS: {rewritten_lhs}
Rewritten RHS: {rewritten_rhs}
Explanation: {explanation}

Verify if the generalized rule is correct. Consider:
1. Does the LHS correctly generalize the before code using @{type: variable} format?
2. Does the RHS correctly generalize the after code using @{variable} format?
3. Are the fresh variables used consistently between LHS and RHS?
4. Does the rule capture the essence of the transformation?
5. Does the LHS and RHS have the same variables and their python AST node types? If not,
you need to provide feedback to change the LHS and RHS to have the same variables and their
python AST node types.

Return your verification in JSON format:
{
    explanation: Detailed explanation of your verification reasoning,
    is_valid: true/false,
    feedback: Specific feedback on what's correct or incorrect
}"""


PRECONDITION_SYNTHESIZER = """\
You are an expert pandas code analyzer specializing in generating runtime preconditions
for code transformation rules.

You are given two pandas code snippets. The before is the normal code and after is the
optimized code. The overall goal is to find a generalized rule. We have already figured out
the variables in the snippet that can be generalized, the python AST node types of these variables
and the generalized LHS and RHS. Your task is to define the runtime preconditions under which
the rewritten LHS can always be transformed into the rewritten RHS.

Before:
{before_code}
After:
{after_code}
Rewritten LHS: {rewritten_lhs}
Rewritten RHS: {rewritten_rhs}
{feedback}

Guidelines:
1.runtime_preconditions is a non-empty list of Python boolean expressions that can each be
used inside `assert (<expr>)` at runtime.
2.Use only names present in the rule (e.g., `@{e1}`, `@{df_var}`) plus standard, fully
qualified pandas/numpy helpers: `pd`, `np`, `pandas`, `numpy`, `pd.api.types`.
3.Assume `import pandas as pd` and `import numpy as np` are already done by the caller.
Do not include import statements in preconditions.
4.Pure expressions only: no `if`, `then`, `else`, `for`, `while`, `try`, `lambda`, f-strings,
or assignments.
5.Do NOT use any prefixes like R: - just write pure Python boolean expressions.
6.Avoid redundant checks (e.g., if you check `type(x) == pd.Series`, don't also check
`isinstance(x, pd.Series)`)
7.Prefer SIMPLER PRECONDITIONS over complex ones unless complexity is ABSOLUTELY NECESSARY.
8.Prefer using 'isinstance' over 'hasattr', wherever possible.
9.Since the preconditions will always be evaluated at runtime, make sure that the runtime of the
preconditions is less than the actual LHS and RHS so that they don't induce a large overhead in
runtime.
10.If there is no possible valid precondition with less runtime, just return False.
11.If you use external libraries in the preconditions, make sure that they are imported
in the preconditions.

Disallowed / common errors (must never appear):
1.Control-flow phrases: If ... then ...
2.English words in place of Python: All elements, and then, equals
3.Unqualified helpers: use .dtype, pd.api.types.is_numeric_dtype, not is_numeric_dtype
4.Preconditions about constants already fixed in the LHS (e.g., `axis == 1`, `inplace == True`)
5.Checks that don't ensure type semantics (e.g., only `hasattr`).
6.Prefixes like R: - just write the boolean expression directly
7.No call-site introspection (no args/kwargs/*args/**kwargs).

Return your analysis in the following JSON format:
{
    explanation: Brief explanation of the runtime preconditions,
    runtime_preconditions: [condition1, condition2, condition3]
}"""


PRECONDITION_CHECKER = """\
You are an adversarial code analysis verifier. Your goal is to find counterexamples where the
transformation rule would be INCORRECT.

Original Code Transformation:
Before (LHS): {before_code}
After (RHS - optimized): {after_code}

Variables for generalization and their AST node types:
{variables_text}

Rewritten LHS: {rewritten_lhs}
Rewritten RHS: {rewritten_rhs}

Agent's Analysis:
Runtime Preconditions: {runtime_preconditions}
Explanation: {explanation}

Your task is to FIND COUNTEREXAMPLES where:
1. The LHS (before code) would execute correctly
2. The RHS (optimized after code) would produce DIFFERENT or INCORRECT results
3. The current runtime preconditions do NOT prevent this case
4. The runtime preconditions would raise an error or not evaluate to a boolean

You should also evaluate if the preconditions are unnecessarily COMPLEX:
1. Are there redundant checks that could be removed?
2. Could complex boolean expressions be simplified?

Only produce output if at least one counterexample OR complexity issue is found.
Return your analysis in JSON format:
{
    "explanation": "Your adversarial analysis",
    "is_valid": true if NO counterexamples found AND preconditions are not overly complex,
    false otherwise,
    "feedback": "Specific feedback",
    "counterexamples": [] (empty list if none found)
}"""
