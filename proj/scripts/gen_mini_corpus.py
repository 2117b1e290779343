#!/usr/bin/env python3
"""Writes a small Juliet-style raw corpus for tests and demos.

Three CWEs (78, 89, 23), ten two-sided cases each, plus per CWE one
multi-file case and one case without a good side, which prep must drop.

    python3 scripts/gen_mini_corpus.py data/mini_corpus/raw
"""

import argparse
import pathlib
import shutil

HEADER = """/* TEMPLATE GENERATED TESTCASE FILE
Filename: {name}.java
Label Definition File: {family}.label.xml
Template File: sources-sinks-{variant}.tmpl.java
*/
/*
 * @description
 * CWE: {cwe}
 * BadSource: {source} Read data from {source_desc}
 * GoodSource: A hardcoded string
 * Sinks:
 *    GoodSink: {good_sink_desc}
 *    BadSink : {bad_sink_desc}
 * Flow Variant: {variant} Data flow: {flow_desc}
 *
 * */
"""

SERVLET_ARGS = "HttpServletRequest request, HttpServletResponse response"
SERVLET_CALL = "request, response"

# name, description, servlet?, code assigning `data`
SOURCES = [
    ("getParameter_Servlet", "a querystring using getParameter()", True,
     'data = request.getParameter("name");'),
    ("getQueryString_Servlet", "the query string", True,
     'data = "";\n        {\n            StringTokenizer tokenizer = new StringTokenizer(request.getQueryString(), "&");\n'
     '            while (tokenizer.hasMoreTokens())\n            {\n                String token = tokenizer.nextToken();\n'
     '                if (token.startsWith("id="))\n                {\n                    data = token.substring(3);\n'
     '                    break;\n                }\n            }\n        }'),
    ("getCookies_Servlet", "the first cookie", True,
     'data = "";\n        {\n            Cookie cookieSources[] = request.getCookies();\n'
     '            if (cookieSources != null)\n            {\n                data = cookieSources[0].getValue();\n'
     '            }\n        }'),
    ("Environment", "an environment variable", False,
     'data = System.getenv("ADD");'),
    ("Property", "a system property", False,
     'data = System.getProperty("user.home");'),
    ("console_readLine", "the console using readLine()", False,
     'data = "";\n        {\n            InputStreamReader readerInputStream = null;\n'
     '            BufferedReader readerBuffered = null;\n            try\n            {\n'
     '                readerInputStream = new InputStreamReader(System.in, "UTF-8");\n'
     '                readerBuffered = new BufferedReader(readerInputStream);\n'
     '                data = readerBuffered.readLine();\n            }\n'
     '            catch (IOException exceptIO)\n            {\n'
     '                IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);\n            }\n        }'),
    ("connect_tcp", "an outbound tcp connection", False,
     'data = "";\n        {\n            Socket socket = null;\n            BufferedReader readerBuffered = null;\n'
     '            try\n            {\n                socket = new Socket("host.example.org", 39544);\n'
     '                readerBuffered = new BufferedReader(new InputStreamReader(socket.getInputStream(), "UTF-8"));\n'
     '                data = readerBuffered.readLine();\n            }\n'
     '            catch (IOException exceptIO)\n            {\n'
     '                IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);\n            }\n        }'),
    ("URLConnection", "a web server with URLConnection", False,
     'data = "";\n        {\n            URLConnection urlConnection = (new URL("http://www.example.org/")).openConnection();\n'
     '            BufferedReader readerBuffered = null;\n            try\n            {\n'
     '                readerBuffered = new BufferedReader(new InputStreamReader(urlConnection.getInputStream(), "UTF-8"));\n'
     '                data = readerBuffered.readLine();\n            }\n'
     '            catch (IOException exceptIO)\n            {\n'
     '                IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);\n            }\n        }'),
    ("getParameter_Servlet", "a querystring using getParameter()", True,
     'data = request.getParameter("name");'),
    ("Environment", "an environment variable", False,
     'data = System.getenv("ADD");'),
]

FLOWS = [
    ("01", "point-flaw", "data flows within the method"),
    ("02", "point-flaw", "if(true) and if(false)"),
    ("03", "point-flaw", "if(5==5) and if(5!=5)"),
    ("04", "point-flaw", "if(PRIVATE_STATIC_FINAL_TRUE) and if(PRIVATE_STATIC_FINAL_FALSE)"),
    ("05", "point-flaw", "if(privateTrue) and if(privateFalse)"),
    ("06", "point-flaw", "if(PRIVATE_STATIC_FINAL_FIVE==5)"),
    ("07", "point-flaw", "if(privateFive==5)"),
    ("08", "point-flaw", "if(privateReturnsTrue())"),
    ("09", "point-flaw", "if(IO.STATIC_FINAL_TRUE)"),
    ("10", "point-flaw", "if(IO.staticTrue)"),
]

CWES = {
    78: dict(
        family="CWE78_OS_Command_Injection",
        imports=["java.util.logging.Level"],
        bad_sink_desc="exec dynamic command execution with Runtime.getRuntime().exec()",
        good_sink_desc="validate the argument against an allow-list before executing",
        bad_sink="""String osCommand;
        if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
        {
            osCommand = "c:\\\\WINDOWS\\\\SYSTEM32\\\\cmd.exe /c dir ";
        }
        else
        {
            osCommand = "/bin/ls ";
        }
        Process process = Runtime.getRuntime().exec(osCommand + data);
        process.waitFor();""",
        good_sink="""String[] allowed = { "-l", "-a", "-la" };
        String argument = "-l";
        for (String candidate : allowed)
        {
            if (candidate.equals(data))
            {
                argument = candidate;
            }
        }
        IO.writeLine("listing with " + argument);""",
        constant='data = "foo";',
    ),
    89: dict(
        family="CWE89_SQL_Injection",
        imports=["java.sql.*", "java.util.logging.Level"],
        bad_sink_desc="Statement.execute with a concatenated query",
        good_sink_desc="use a PreparedStatement with bound parameters",
        bad_sink="""Connection dbConnection = null;
        Statement sqlStatement = null;
        try
        {
            dbConnection = IO.getDBConnection();
            sqlStatement = dbConnection.createStatement();
            Boolean result = sqlStatement.execute("insert into users (status) values ('updated') where name='"+data+"'");
            if(result)
            {
                IO.writeLine("Name, " + data + ", updated successfully");
            }
        }
        catch (SQLException exceptSql)
        {
            IO.logger.log(Level.WARNING, "Error getting database connection", exceptSql);
        }""",
        good_sink="""Connection dbConnection = null;
        PreparedStatement sqlStatement = null;
        try
        {
            dbConnection = IO.getDBConnection();
            sqlStatement = dbConnection.prepareStatement("insert into users (status) values ('updated') where name=?");
            sqlStatement.setString(1, data);
            Boolean result = sqlStatement.execute();
            if (result)
            {
                IO.writeLine("Name, " + data + ", updated successfully");
            }
        }
        catch (SQLException exceptSql)
        {
            IO.logger.log(Level.WARNING, "Error getting database connection", exceptSql);
        }""",
        constant='data = "foo";',
    ),
    23: dict(
        family="CWE23_Relative_Path_Traversal",
        imports=["java.util.logging.Level"],
        bad_sink_desc="readFile no validation",
        good_sink_desc="resolve the canonical path and require it to stay under the root",
        bad_sink="""String root;
        if(System.getProperty("os.name").toLowerCase().indexOf("win") >= 0)
        {
            root = "C:\\\\uploads\\\\";
        }
        else
        {
            root = "/home/user/uploads/";
        }
        if (data != null)
        {
            File file = new File(root + data);
            FileInputStream streamFileInputSink = null;
            InputStreamReader readerInputStreamSink = null;
            BufferedReader readerBufferdSink = null;
            if (file.exists() && file.isFile())
            {
                try
                {
                    streamFileInputSink = new FileInputStream(file);
                    readerInputStreamSink = new InputStreamReader(streamFileInputSink, "UTF-8");
                    readerBufferdSink = new BufferedReader(readerInputStreamSink);
                    IO.writeLine(readerBufferdSink.readLine());
                }
                catch (IOException exceptIO)
                {
                    IO.logger.log(Level.WARNING, "Error with stream reading", exceptIO);
                }
            }
        }""",
        good_sink="""String root = "/home/user/uploads/";
        if (data != null)
        {
            File file = new File(root + data);
            if (!file.getCanonicalPath().startsWith(new File(root).getCanonicalPath()))
            {
                IO.writeLine("path outside the upload root");
                return;
            }
            if (file.exists() && file.isFile())
            {
                IO.writeLine("found " + file.getName());
            }
        }""",
        constant='data = "foo";',
    ),
}

BASE_IMPORTS = ["testcasesupport.*", "javax.servlet.http.*", "java.io.*", "java.net.*", "java.util.StringTokenizer"]


def guard(flow):
    return {
        "01": None, "02": "true", "03": "5 == 5", "04": "PRIVATE_STATIC_FINAL_TRUE",
        "05": "privateTrue", "06": "PRIVATE_STATIC_FINAL_FIVE == 5", "07": "privateFive == 5",
        "08": "IO.staticReturnsTrue()", "09": "IO.STATIC_FINAL_TRUE", "10": "IO.staticTrue",
    }[flow]


def fields(flow):
    return {
        "04": ["private static final boolean PRIVATE_STATIC_FINAL_TRUE = true;",
               "private static final boolean PRIVATE_STATIC_FINAL_FALSE = false;"],
        "05": ["private boolean privateTrue = true;", "private boolean privateFalse = false;"],
        "06": ["private static final int PRIVATE_STATIC_FINAL_FIVE = 5;"],
        "07": ["private int privateFive = 5;"],
    }.get(flow, [])


def indent(text, n):
    pad = " " * n
    return "\n".join(pad + line if line else line for line in text.split("\n"))


def body(assign, sink, flow):
    g = guard(flow)
    lines = ["String data;"]
    if g is None:
        lines.append(assign)
    else:
        lines.append("if (%s)\n{\n%s\n}\nelse\n{\n    data = null;\n}" % (g, indent(assign, 4)))
    lines.append(sink)
    return indent("\n".join(lines), 8)


def method(visibility, name, params, text):
    return "    %s void %s(%s) throws Throwable\n    {\n%s\n    }\n" % (visibility, name, params, text)


def render_case(cwe, idx, with_good=True):
    spec = CWES[cwe]
    source, source_desc, servlet, assign = SOURCES[idx]
    flow, variant, flow_desc = FLOWS[idx]
    name = "%s__%s_%s" % (spec["family"], source, flow)
    params = SERVLET_ARGS if servlet else ""
    call = SERVLET_CALL if servlet else ""
    head = HEADER.format(name=name, family=spec["family"], variant=variant, cwe="%d %s" % (cwe, spec["family"]),
                         source=source, source_desc=source_desc, good_sink_desc=spec["good_sink_desc"],
                         bad_sink_desc=spec["bad_sink_desc"], flow_desc=flow_desc)
    out = [head, "package testcases.%s;\n" % spec["family"]]
    for imp in BASE_IMPORTS + spec["imports"]:
        out.append("import %s;" % imp)
    out.append("")
    parent = "AbstractTestCaseServlet" if servlet else "AbstractTestCase"
    out.append("public class %s extends %s\n{" % (name, parent))
    for f in fields(flow):
        out.append("    " + f)
    if fields(flow):
        out.append("")
    out.append(method("public", "bad", params, body(assign, spec["bad_sink"], flow)))
    if with_good:
        out.append(method("public", "good", params,
                          "        goodG2B(%s);\n        goodB2G(%s);" % (call, call)))
        out.append("    /* goodG2B() - use goodsource and badsink */")
        out.append(method("private", "goodG2B", params, body(spec["constant"], spec["bad_sink"], flow)))
        out.append("    /* goodB2G() - use badsource and goodsink */")
        out.append(method("private", "goodB2G", params, body(assign, spec["good_sink"], flow)))
    runner = "mainFromServlet" if servlet else "mainFromConsole"
    out.append("    public static void main(String[] args) throws ClassNotFoundException,\n"
               "           InstantiationException, IllegalAccessException\n    {\n"
               "        %s(args);\n    }\n}\n" % runner)
    return name, "\n".join(out)


def render_multi_file(cwe):
    spec = CWES[cwe]
    stem = "%s__Environment_61" % spec["family"]
    a = ("package testcases.%s;\n\nimport testcasesupport.*;\n\npublic class %sa extends AbstractTestCase\n{\n"
         "    public void bad() throws Throwable\n    {\n        String data = (new %sb()).badSource();\n"
         "        IO.writeLine(data);\n    }\n\n    public void good() throws Throwable\n    {\n"
         "        String data = (new %sb()).goodG2BSource();\n        IO.writeLine(data);\n    }\n}\n"
         % (spec["family"], stem, stem, stem))
    b = ("package testcases.%s;\n\nimport testcasesupport.*;\n\npublic class %sb\n{\n"
         "    public String badSource() throws Throwable\n    {\n        return System.getenv(\"ADD\");\n    }\n\n"
         "    public String goodG2BSource() throws Throwable\n    {\n        return \"foo\";\n    }\n}\n"
         % (spec["family"], stem))
    return {stem + "a": a, stem + "b": b}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=pathlib.Path)
    args = ap.parse_args()
    if args.out.exists():
        shutil.rmtree(args.out)
    for cwe, spec in CWES.items():
        d = args.out / spec["family"]
        d.mkdir(parents=True)
        for idx in range(len(SOURCES)):
            name, text = render_case(cwe, idx)
            (d / (name + ".java")).write_text(text)
        for name, text in render_multi_file(cwe).items():
            (d / (name + ".java")).write_text(text)
        # A case with no good side: prep has nothing to pair it with.
        name, text = render_case(cwe, 4, with_good=False)
        name_only = name.replace("_05", "_17")
        (d / (name_only + ".java")).write_text(text.replace(name, name_only))


if __name__ == "__main__":
    main()
